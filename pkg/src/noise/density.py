"""
Exact density-matrix evolution through the same slice schedule as the
trajectory simulator. Used as an oracle for small registers.
"""
from typing import Optional

import numpy as np

from src.engine.circuit import Circuit, GateLayer, Observable, PhaseEncoding
from src.engine.gates import PAULIS
from src.engine.hamiltonian import Hamiltonian
from src.engine.schema import EvolutionMethod, ExactEigen, Trotter2
from src.engine.state import StateVector, apply_1q_array, phase_encoding_diagonal, zero_state
from src.entanglement.component import state_fidelity
from src.entanglement.schema import DensityMatrix
from src.utils.logger import get_logger
from .channels import Decay, EvolveSlice, amplitude_damping_kraus, decay_parameters, noise_schedule
from .readout import readout_expectation
from .schema import NoiseModel

logger = get_logger(__name__)

DENSITY_MAX_QUBITS = 6


def _conjugate_1q(rho: np.ndarray, n_qubits: int, qubit: int, gate: np.ndarray) -> np.ndarray:
    """G rho G^dag for G acting on one qubit."""
    left = apply_1q_array(rho.T, n_qubits, qubit, gate).T
    return apply_1q_array(left, n_qubits, qubit, gate.conj())


def _decay(rho: np.ndarray, n_qubits: int, gamma: np.ndarray, dephase: np.ndarray) -> np.ndarray:
    z = PAULIS["z"]
    for q in range(n_qubits):
        if gamma[q] > 0:
            k0, k1 = amplitude_damping_kraus(gamma[q])
            rho = _conjugate_1q(rho, n_qubits, q, k0) + _conjugate_1q(rho, n_qubits, q, k1)
        if dephase[q] > 0:
            rho = (1.0 - dephase[q]) * rho + dephase[q] * _conjugate_1q(rho, n_qubits, q, z)
    return rho


def run_noisy_density(
    circuit: Circuit,
    hamiltonian: Hamiltonian,
    noise: NoiseModel,
    method: EvolutionMethod = ExactEigen(),
    initial: Optional[StateVector] = None,
) -> DensityMatrix:
    """Final state of the circuit under exact Kraus channels (no readout error)."""
    n = circuit.n_qubits
    if n > DENSITY_MAX_QUBITS:
        raise ValueError(f"Density-matrix simulation limited to {DENSITY_MAX_QUBITS} qubits, got {n}")
    if noise.n_qubits != n:
        raise ValueError(f"Noise model covers {noise.n_qubits} qubits, circuit has {n}")
    if isinstance(method, Trotter2):
        logger.warning("Density oracle evolves exactly; Trotter2 setting ignored")

    psi = (initial or zero_state(n)).amplitudes
    rho = np.outer(psi, psi.conj())
    for step in noise_schedule(circuit, noise):
        if isinstance(step, EvolveSlice):
            propagator = hamiltonian.propagator(step.t)
            rho = propagator @ rho @ propagator.conj().T
        elif isinstance(step, PhaseEncoding):
            diagonal = phase_encoding_diagonal(n, step.phi)
            rho = rho * np.outer(diagonal, diagonal.conj())
        elif isinstance(step, GateLayer):
            for qubit, gate in step.gates:
                rho = _conjugate_1q(rho, n, qubit, gate)
        elif isinstance(step, Decay):
            gamma, dephase = decay_parameters(noise, step.duration_ns)
            rho = _decay(rho, n, gamma, dephase)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(n, rho)


def density_expectation(rho: DensityMatrix, observable: Observable, noise: Optional[NoiseModel] = None) -> float:
    """Tr(rho sigma), with the readout error of `noise` applied when enabled."""
    if observable.pauli == "z":
        index = np.arange(2 ** rho.n_qubits)
        value = rho.expectation_diagonal(1.0 - 2.0 * ((index >> observable.qubit) & 1))
    else:
        transformed = apply_1q_array(rho.matrix.T, rho.n_qubits, observable.qubit, PAULIS[observable.pauli])
        value = float(np.real(np.trace(transformed)))
    if noise is not None and noise.readout:
        value = float(readout_expectation(value, noise.f_gg[observable.qubit], noise.f_ee[observable.qubit]))
    return value


def fidelity_to_pure(rho: DensityMatrix, state: StateVector) -> float:
    return state_fidelity(rho, state)
