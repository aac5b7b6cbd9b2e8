"""
Quantum-trajectory simulation of amplitude damping and pure dephasing.

Trajectories of one grid point are propagated together as an array of
shape (n_trajectories, 2**N). Trajectory k of grid point i draws all its
random numbers up front from SeedSequence(seed, spawn_key=(i, k)), so the
estimate does not depend on chunking or on worker scheduling.
"""
import math
from typing import Optional, Sequence

import numpy as np

from src.engine.circuit import Circuit, GateLayer, Observable, PhaseEncoding, apply_operation
from src.engine.hamiltonian import Hamiltonian, propagate_array
from src.engine.schema import EvolutionMethod, ExactEigen, Trotter2
from src.engine.state import StateVector, expectation_array, zero_state
from src.utils.logger import get_logger
from .channels import Decay, EvolveSlice, decay_parameters, noise_schedule
from .readout import readout_expectation
from .schema import NoiseModel, NoisyEstimate, TrajectoryConfig

logger = get_logger(__name__)


def trajectory_rng(seed: int, point_index: int, trajectory_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point_index, trajectory_index)))


def _qubit_indices(n_qubits: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    index = np.arange(2 ** n_qubits)
    excited = [index[(index >> q) & 1 == 1] for q in range(n_qubits)]
    ground = [exc ^ (1 << q) for q, exc in enumerate(excited)]
    return excited, ground


def _normalize_rows(states: np.ndarray) -> None:
    states /= np.linalg.norm(states, axis=1, keepdims=True)


def _decay_batch(states, gamma, dephase, draws, excited, ground) -> None:
    """In place: one damping and one dephasing draw per qubit and trajectory."""
    for q in range(len(excited)):
        exc, gnd = excited[q], ground[q]
        if gamma[q] > 0:
            p1 = np.sum(np.abs(states[:, exc]) ** 2, axis=1)
            jump = draws[:, q, 0] < gamma[q] * p1
            jumped = np.flatnonzero(jump)
            kept = np.flatnonzero(~jump)
            if jumped.size:
                lowered = states[np.ix_(jumped, exc)]
                states[jumped] = 0.0
                states[np.ix_(jumped, gnd)] = lowered
            if kept.size:
                states[np.ix_(kept, exc)] *= math.sqrt(1.0 - gamma[q])
            _normalize_rows(states)
        if dephase[q] > 0:
            flipped = np.flatnonzero(draws[:, q, 1] < dephase[q])
            if flipped.size:
                states[np.ix_(flipped, exc)] *= -1.0


def _evolve_batch(states, hamiltonian: Hamiltonian, t: float, method: EvolutionMethod) -> np.ndarray:
    if isinstance(method, Trotter2):
        return propagate_array(states, hamiltonian, t, method)
    return states @ hamiltonian.propagator(t).T


def _trajectory_values(
    circuit: Circuit,
    hamiltonian: Hamiltonian,
    noise: NoiseModel,
    config: TrajectoryConfig,
    observables: Sequence[Observable],
    method: EvolutionMethod,
    initial: Optional[StateVector],
    chunk_size: int,
) -> np.ndarray:
    """Per-trajectory observable values, shape (n_trajectories, n_observables), before readout."""
    n = circuit.n_qubits
    if noise.n_qubits != n:
        raise ValueError(f"Noise model covers {noise.n_qubits} qubits, circuit has {n}")

    schedule = noise_schedule(circuit, noise)
    n_decays = sum(isinstance(step, Decay) for step in schedule)
    decay_cache = {}
    excited, ground = _qubit_indices(n)
    start = (initial or zero_state(n)).amplitudes

    values = np.empty((config.n_trajectories, len(observables)))
    for first in range(0, config.n_trajectories, chunk_size):
        batch_ids = range(first, min(first + chunk_size, config.n_trajectories))
        draws = np.stack(
            [trajectory_rng(config.seed, config.point_index, k).random((n_decays, n, 2)) for k in batch_ids]
        )
        states = np.repeat(start[None, :], len(batch_ids), axis=0).astype(np.complex128)
        decay_step = 0
        for step in schedule:
            if isinstance(step, EvolveSlice):
                states = _evolve_batch(states, hamiltonian, step.t, method)
            elif isinstance(step, (GateLayer, PhaseEncoding)):
                states = apply_operation(states, step, hamiltonian, method)
            else:
                if step.duration_ns not in decay_cache:
                    decay_cache[step.duration_ns] = decay_parameters(noise, step.duration_ns)
                gamma, dephase = decay_cache[step.duration_ns]
                _decay_batch(states, gamma, dephase, draws[:, decay_step], excited, ground)
                decay_step += 1
        for column, observable in enumerate(observables):
            values[first:first + len(batch_ids), column] = expectation_array(
                states, n, observable.pauli, observable.qubit
            )
    logger.debug(f"{circuit.name}: {config.n_trajectories} trajectories over {n_decays} decay steps")
    return values


def _estimate(values: np.ndarray, observable: Observable, noise: NoiseModel) -> NoisyEstimate:
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    if noise.readout:
        f_gg, f_ee = noise.f_gg[observable.qubit], noise.f_ee[observable.qubit]
        mean = float(readout_expectation(mean, f_gg, f_ee))
        stderr *= f_gg + f_ee - 1.0
    return NoisyEstimate(mean=mean, stderr=stderr, n_trajectories=values.size)


def run_noisy_trajectories(
    circuit: Circuit,
    hamiltonian: Hamiltonian,
    noise: NoiseModel,
    config: TrajectoryConfig,
    method: EvolutionMethod = ExactEigen(),
    initial: Optional[StateVector] = None,
    chunk_size: int = 500,
) -> NoisyEstimate:
    """Trajectory mean of the circuit observable with its standard error."""
    values = _trajectory_values(
        circuit, hamiltonian, noise, config, [circuit.observable], method, initial, chunk_size
    )
    return _estimate(values[:, 0], circuit.observable, noise)


def run_noisy_observables(
    circuit: Circuit,
    hamiltonian: Hamiltonian,
    noise: NoiseModel,
    config: TrajectoryConfig,
    observables: Sequence[Observable],
    method: EvolutionMethod = ExactEigen(),
    initial: Optional[StateVector] = None,
    chunk_size: int = 500,
) -> list[NoisyEstimate]:
    """Several observables measured on the same set of trajectories."""
    values = _trajectory_values(circuit, hamiltonian, noise, config, observables, method, initial, chunk_size)
    return [_estimate(values[:, k], observable, noise) for k, observable in enumerate(observables)]
