import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.engine.circuit import Circuit, Evolution, GateLayer, Observable, measure, run_circuit
from src.engine.gates import PAULI_X
from src.engine.graph import QubitGraph, chain_graph
from src.engine.hamiltonian import build_hamiltonian
from src.engine.state import basis_state
from src.noise import (
    NoiseModel,
    TrajectoryConfig,
    apply_readout_error,
    damping_probability,
    density_expectation,
    dephasing_probability,
    fidelity_to_pure,
    noise_schedule,
    normalize_otoc,
    normalize_signal,
    readout_correct,
    readout_expectation,
    readout_matrix,
    run_noisy_density,
    run_noisy_observables,
    run_noisy_trajectories,
)
from src.noise.channels import Decay, EvolveSlice
from src.protocol import ProtocolSpec
from src.protocol.component import hamiltonian_for, otoc_circuit, reference_circuit, sensing_circuit
from src.utils.errors import ReferenceGuardError, SingularMatrixError

J = 2 * np.pi * 3e-3


@pytest.fixture
def decay_setup():
    """One excited qubit idling for 5 us with T1 = 10 us and no pure dephasing."""
    graph = QubitGraph.from_edges(1, [])
    circuit = Circuit(1, (Evolution(5000.0),), Observable("z", 0), name="idle")
    noise = NoiseModel(t1_us=(10.0,), t2_us=(20.0,), f_gg=(1.0,), f_ee=(1.0,), readout=False)
    return circuit, build_hamiltonian(graph, J), noise


@pytest.fixture
def chain3_spec():
    return ProtocolSpec(graph=chain_graph(3), j=J, mode="hardware")


def test_damping_and_dephasing_probabilities():
    assert damping_probability(1000.0, 1.0) == pytest.approx(1 - math.exp(-1))
    assert damping_probability(0.0, 10.0) == 0.0
    assert dephasing_probability(4.0, 10.0, 20.0) == 0.0
    # 1/T_phi = 1/5 - 1/20 per us
    assert dephasing_probability(1000.0, 10.0, 5.0) == pytest.approx(0.5 * (1 - math.exp(-0.15)))
    with pytest.raises(ValueError):
        dephasing_probability(4.0, 10.0, 25.0)


def test_noise_model_validation():
    model = NoiseModel.table1(6)
    assert model.n_qubits == 6
    assert model.t1_us[0] == 33.9
    assert model.f_ee[5] == 0.910
    with pytest.raises(ValueError):
        NoiseModel.table1(11)
    with pytest.raises(ValidationError):
        NoiseModel(t1_us=(10.0,), t2_us=(25.0,), f_gg=(0.95,), f_ee=(0.95,))
    with pytest.raises(ValidationError):
        NoiseModel(t1_us=(10.0, 10.0), t2_us=(5.0,), f_gg=(0.95,), f_ee=(0.95,))


def test_schedule_slices_evolution_and_gate_windows():
    circuit = Circuit(1, (GateLayer(((0, PAULI_X),)), Evolution(10.0)), Observable("z", 0))
    schedule = noise_schedule(circuit, NoiseModel.noiseless(1))
    assert isinstance(schedule[0], GateLayer)
    assert [type(step) for step in schedule[1:6]] == [Decay] * 5
    slices = [step for step in schedule if isinstance(step, EvolveSlice)]
    assert len(slices) == 3
    assert sum(step.t for step in slices) == pytest.approx(10.0)


def test_readout_single_qubit_example():
    matrix = readout_matrix(0.959, 0.939)
    measured = apply_readout_error([1.0, 0.0], matrix)
    assert np.allclose(measured, [0.959, 0.041])
    assert np.allclose(readout_correct(measured, matrix), [1.0, 0.0])
    assert np.allclose(readout_correct([0.3, 0.7], np.eye(2)), [0.3, 0.7])


def test_readout_multi_qubit_round_trip():
    matrices = [readout_matrix(0.959, 0.939), readout_matrix(0.954, 0.931), readout_matrix(0.943, 0.904)]
    rng = np.random.default_rng(0)
    true = rng.dirichlet(np.ones(8))
    measured = apply_readout_error(true, matrices)
    assert measured.sum() == pytest.approx(1.0)
    assert np.allclose(readout_correct(measured, matrices), true, atol=1e-12)


def test_readout_flips_are_per_qubit():
    # |10>: qubit 1 excited; only qubit 1's matrix acts on its bit
    matrices = [readout_matrix(0.9, 0.8), readout_matrix(0.95, 0.7)]
    measured = apply_readout_error([0.0, 0.0, 1.0, 0.0], matrices)
    assert np.allclose(measured, [0.9 * 0.3, 0.1 * 0.3, 0.9 * 0.7, 0.1 * 0.7])


def test_singular_readout_matrix():
    with pytest.raises(SingularMatrixError):
        readout_matrix(0.5, 0.5)
    with pytest.raises(SingularMatrixError):
        readout_correct([0.5, 0.5], np.full((2, 2), 0.5))


def test_readout_expectation():
    assert readout_expectation(1.0, 0.959, 0.939) == pytest.approx(0.959 - 0.041)
    assert readout_expectation(-1.0, 0.959, 0.939) == pytest.approx(0.061 - 0.939)


def test_normalize_signal():
    assert normalize_signal(0.4, 0.8).value == pytest.approx(0.5)
    clipped = normalize_signal(0.9, 0.5)
    assert clipped.clipped and clipped.value == pytest.approx(1.2)
    with pytest.raises(ReferenceGuardError):
        normalize_signal(0.01, 0.03)
    assert np.allclose(normalize_otoc([0.5, -0.25], 0.5), [1.0, -0.5])
    with pytest.raises(ReferenceGuardError):
        normalize_otoc([0.5], -0.04)


def test_trajectory_t1_decay(decay_setup):
    circuit, hamiltonian, noise = decay_setup
    estimate = run_noisy_trajectories(
        circuit, hamiltonian, noise, TrajectoryConfig(n_trajectories=2000, seed=3), initial=basis_state(1, 1)
    )
    expected = 1.0 - 2.0 * math.exp(-0.5)
    assert estimate.stderr > 0
    assert abs(estimate.mean - expected) <= 4 * estimate.stderr


def test_density_t1_decay(decay_setup):
    circuit, hamiltonian, noise = decay_setup
    rho = run_noisy_density(circuit, hamiltonian, noise, initial=basis_state(1, 1))
    assert rho.matrix[1, 1].real == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert density_expectation(rho, circuit.observable) == pytest.approx(1.0 - 2.0 * math.exp(-0.5), abs=1e-12)


def test_noiseless_model_reproduces_pure_simulation(chain3_spec):
    circuit = sensing_circuit(chain3_spec, 40.0, 0.3, (True, False, True))
    hamiltonian = hamiltonian_for(chain3_spec.graph, J)
    pure = run_circuit(circuit, hamiltonian)
    noise = NoiseModel.noiseless(3)

    estimate = run_noisy_trajectories(circuit, hamiltonian, noise, TrajectoryConfig(n_trajectories=20))
    assert estimate.mean == pytest.approx(measure(pure, circuit.observable), abs=1e-9)
    assert estimate.stderr == pytest.approx(0.0, abs=1e-12)
    rho = run_noisy_density(circuit, hamiltonian, noise)
    assert fidelity_to_pure(rho, pure) == pytest.approx(1.0, abs=1e-9)


def test_trajectories_match_density_oracle(chain3_spec):
    circuit = sensing_circuit(chain3_spec, 40.0, 0.5, (False, True, False))
    hamiltonian = hamiltonian_for(chain3_spec.graph, J)
    noise = NoiseModel.table1(3)
    exact = density_expectation(run_noisy_density(circuit, hamiltonian, noise), circuit.observable, noise)

    estimates = [
        run_noisy_trajectories(circuit, hamiltonian, noise, TrajectoryConfig(n_trajectories=500, seed=seed))
        for seed in range(20)
    ]
    means = np.array([e.mean for e in estimates])
    stderrs = np.array([e.stderr for e in estimates])
    pooled_stderr = np.sqrt(np.sum(stderrs ** 2)) / len(estimates)
    assert abs(means.mean() - exact) <= 3 * pooled_stderr + 1e-12
    within = np.abs(means - exact) <= 3 * stderrs + 1e-12
    assert within.sum() >= 18


def test_trajectory_estimate_is_independent_of_chunking(chain3_spec):
    circuit = otoc_circuit(chain3_spec, 24.0, 2, (True, True, False))
    hamiltonian = hamiltonian_for(chain3_spec.graph, J)
    noise = NoiseModel.table1(3)
    config = TrajectoryConfig(n_trajectories=300, seed=5, point_index=4)
    first = run_noisy_trajectories(circuit, hamiltonian, noise, config, chunk_size=300)
    second = run_noisy_trajectories(circuit, hamiltonian, noise, config, chunk_size=64)
    assert first.mean == second.mean
    other_point = run_noisy_trajectories(
        circuit, hamiltonian, noise, config.model_copy(update={"point_index": 5})
    )
    assert other_point.mean != first.mean


def test_observables_share_trajectories(chain3_spec):
    circuit = otoc_circuit(chain3_spec, 24.0, 0, (False, False, False))
    hamiltonian = hamiltonian_for(chain3_spec.graph, J)
    noise = NoiseModel.table1(3)
    config = TrajectoryConfig(n_trajectories=200, seed=1)
    observables = [Observable("z", q) for q in range(3)]
    estimates = run_noisy_observables(circuit, hamiltonian, noise, config, observables)
    single = run_noisy_trajectories(circuit, hamiltonian, noise, config)
    assert estimates[0].mean == pytest.approx(single.mean, abs=1e-12)
    assert len(estimates) == 3


def test_noisy_reference_decays(chain3_spec):
    circuit = reference_circuit(chain3_spec, 80.0, (False, False, False))
    hamiltonian = hamiltonian_for(chain3_spec.graph, J)
    noise = NoiseModel.table1(3)
    rho = run_noisy_density(circuit, hamiltonian, noise)
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-9
    assert density_expectation(rho, circuit.observable, noise) < 1.0


def test_noise_model_size_must_match(chain3_spec):
    circuit = reference_circuit(chain3_spec, 10.0, (False, False, False))
    with pytest.raises(ValueError):
        run_noisy_density(circuit, hamiltonian_for(chain3_spec.graph, J), NoiseModel.table1(4))
