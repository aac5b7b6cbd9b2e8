import numpy as np
import pytest

from src.engine.graph import QubitGraph, chain_graph, preset_graph
from src.engine.state import expectation_sz
from src.protocol import (
    ProtocolSpec,
    RunRecord,
    butterfly_state,
    clear_caches,
    encoding_angles,
    hamiltonian_for,
    otoc_profile,
    run_otoc,
    run_reference,
    run_sensing_abstract,
    run_sensing_hardware,
    sample_x_masks,
    scrambled_state,
    sensing_circuit,
    sensing_curve,
)
from src.protocol.component import MAX_CACHED_HAMILTONIANS, _HAMILTONIANS, otoc_circuit, _run
from src.utils.errors import NotBipartiteError

J = 2 * np.pi * 3e-3  # rad/ns


@pytest.fixture
def chain4_spec():
    # Center qubit 1 is red, which exercises the insert-before-sign-flip ordering.
    return ProtocolSpec(graph=chain_graph(4), j=J)


@pytest.fixture
def single_qubit_graph():
    return QubitGraph.from_edges(1, [])


def test_masks_are_deterministic_and_balanced():
    first = sample_x_masks(6, 10, seed=11)
    assert first == sample_x_masks(6, 10, seed=11)
    assert first != sample_x_masks(6, 10, seed=12)
    assert all(len(mask) == 6 for mask in first)

    flips = np.array(sample_x_masks(6, 10_000, seed=5))
    assert np.all(np.abs(flips.mean(axis=0) - 0.5) < 0.03)


def test_masks_exclude_pins_qubit():
    masks = sample_x_masks(4, 50, seed=1, exclude=2)
    assert not any(mask[2] for mask in masks)
    with pytest.raises(ValueError):
        sample_x_masks(4, 0, seed=1)


def test_encoding_angle_cases():
    assert encoding_angles("blue", False, 0.3) == pytest.approx(0.3)
    assert encoding_angles("blue", True, 0.3) == pytest.approx(-0.3)
    assert encoding_angles("red", False, 0.3) == pytest.approx(0.3 + np.pi)
    assert encoding_angles("red", True, 0.3) == pytest.approx(np.pi - 0.3)


@pytest.mark.parametrize("lv_sign", [1, -1])
@pytest.mark.parametrize("mask", [(False,), (True,)])
def test_single_qubit_sensing_is_a_sine(single_qubit_graph, lv_sign, mask):
    spec = ProtocolSpec(graph=single_qubit_graph, j=J, lv_sign=lv_sign)
    for phi in np.linspace(-np.pi, np.pi, 9):
        expected = -lv_sign * np.sin(phi)
        assert run_sensing_abstract(spec, 25.0, phi, mask) == pytest.approx(expected, abs=1e-12)
        assert run_sensing_hardware(spec, 25.0, phi, mask) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("insert_gate", [None, "rx_plus", "x"])
def test_hardware_sequence_matches_abstract_on_chain(chain4_spec, insert_gate):
    spec = chain4_spec.model_copy(update={"insert_gate": insert_gate})
    masks = sample_x_masks(4, 3, seed=2)
    for mask in masks:
        for t in np.linspace(0.0, 80.0, 5):
            for phi in np.linspace(-1.2, 1.2, 5):
                abstract = run_sensing_abstract(spec, t, phi, mask)
                hardware = run_sensing_hardware(spec, t, phi, mask)
                assert abs(abstract - hardware) < 1e-8


def test_hardware_sequence_matches_abstract_on_lattice():
    spec = ProtocolSpec(graph=preset_graph("n6"), j=J, lv_sign=-1)
    for mask in sample_x_masks(6, 2, seed=9):
        for t, phi in [(16.0, 0.4), (64.0, -0.9), (120.0, 2.0)]:
            assert run_sensing_hardware(spec, t, phi, mask) == pytest.approx(
                run_sensing_abstract(spec, t, phi, mask), abs=1e-8
            )


def test_hardware_mode_needs_bipartite_coloring():
    graph = chain_graph(3)
    broken = graph.model_construct(
        n_qubits=3, edges=graph.edges, coloring=("blue", "blue", "red"), center=1, name="broken"
    )
    spec = ProtocolSpec.model_construct(graph=broken, j=J, insert_gate=None, lv_sign=1, mode="hardware")
    with pytest.raises(NotBipartiteError):
        sensing_circuit(spec, 10.0, 0.1, (False, False, False))


def test_sensing_is_zero_at_zero_phase(chain4_spec):
    for mask in sample_x_masks(4, 4, seed=3):
        assert run_sensing_abstract(chain4_spec, 48.0, 0.0, mask) == pytest.approx(0.0, abs=1e-12)


def test_sensing_curve_matches_pointwise(chain4_spec):
    phis = np.linspace(-np.pi, np.pi, 11)
    mask = (True, False, False, True)
    curve = sensing_curve(chain4_spec, 40.0, phis, mask)
    pointwise = [run_sensing_abstract(chain4_spec, 40.0, phi, mask) for phi in phis]
    assert np.allclose(curve, pointwise, atol=1e-12)

    hardware_spec = chain4_spec.model_copy(update={"mode": "hardware"})
    assert np.allclose(sensing_curve(hardware_spec, 40.0, phis, mask), curve, atol=1e-8)


@pytest.mark.parametrize("graph_name", ["chain4", "n6"])
def test_sensing_curve_matches_pointwise_for_random_masks(graph_name):
    spec = ProtocolSpec(graph=preset_graph(graph_name), j=J)
    phis = np.array([-1.2, -0.3, 0.0, 0.4, 2.0])
    masks = [mask for mask in sample_x_masks(spec.n_qubits, 8, seed=21) if any(mask)][:4]
    assert len(masks) >= 3
    for mask in masks:
        for t in (16.0, 40.0, 72.0):
            curve = sensing_curve(spec, t, phis, mask)
            pointwise = [run_sensing_abstract(spec, t, phi, mask) for phi in phis]
            assert np.allclose(curve, pointwise, atol=1e-10), (mask, t)


def test_otoc_at_time_zero(chain4_spec):
    mask = (False, True, True, False)
    for target in range(4):
        expected = -1.0 if target == chain4_spec.center else 1.0
        assert run_otoc(chain4_spec, 0.0, target, mask) == pytest.approx(expected)


def test_otoc_two_qubit_oracle():
    spec = ProtocolSpec(graph=chain_graph(2), j=J)
    for t in [0.0, 10.0, 33.0, 70.0]:
        for mask in [(False, False), (True, True), (True, False)]:
            assert run_otoc(spec, t, 1, mask) == pytest.approx(np.cos(4 * J * t), abs=1e-12)
            assert run_otoc(spec, t, 0, mask) == pytest.approx(-np.cos(4 * J * t), abs=1e-12)


def test_hardware_otoc_matches_abstract(chain4_spec):
    mask = (True, False, True, True)
    for t in [12.0, 56.0]:
        for target in range(4):
            abstract = _run(chain4_spec, otoc_circuit(chain4_spec, t, target, mask, mode="abstract"))
            hardware = _run(chain4_spec, otoc_circuit(chain4_spec, t, target, mask, mode="hardware"))
            assert abstract == pytest.approx(hardware, abs=1e-8)


def test_otoc_target_out_of_range(chain4_spec):
    with pytest.raises(ValueError):
        run_otoc(chain4_spec, 1.0, 4, (False,) * 4)


def test_reference_is_one_without_noise(chain4_spec):
    hardware_spec = chain4_spec.model_copy(update={"mode": "hardware"})
    for t in [0.0, 40.0, 160.0]:
        assert run_reference(chain4_spec, t) == pytest.approx(1.0, abs=1e-10)
        assert run_reference(hardware_spec, t, (True, True, False, True)) == pytest.approx(1.0, abs=1e-10)


def test_polarization_equals_half_otoc_sum(chain4_spec):
    mask = (True, False, True, False)
    profile = otoc_profile(chain4_spec, 64.0, mask)
    state = scrambled_state(chain4_spec, 64.0, mask)
    assert expectation_sz(state) == pytest.approx(0.5 * profile.sum(), abs=1e-10)
    for target in range(4):
        assert run_otoc(chain4_spec, 64.0, target, mask) == pytest.approx(profile[target], abs=1e-10)


def test_butterfly_state_is_balanced(chain4_spec):
    for t in [0.0, 30.0, 150.0]:
        state = butterfly_state(chain4_spec, t, (False, True, False, False))
        assert state.norm() == pytest.approx(1.0, abs=1e-12)
        assert abs(state.amplitudes[0]) ** 2 == pytest.approx(0.5, abs=1e-10)


def test_mask_length_checked(chain4_spec):
    with pytest.raises(ValueError):
        run_sensing_abstract(chain4_spec, 1.0, 0.1, (False, True))


def test_run_record_bounds_the_observable():
    record = RunRecord(t=8.0, phi=0.1, mask_index=2, value=1.0 + 1e-12, observable="sigma_x")
    assert record.value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        RunRecord(t=8.0, phi=0.1, mask_index=2, value=-1.01, observable="sigma_x")


def test_hamiltonian_cache_is_bounded():
    clear_caches()
    first = hamiltonian_for(chain_graph(2), J)
    assert hamiltonian_for(chain_graph(2), J) is first
    for k in range(MAX_CACHED_HAMILTONIANS + 3):
        hamiltonian_for(chain_graph(2), J * (1.0 + 0.01 * (k + 1)))
    assert len(_HAMILTONIANS) == MAX_CACHED_HAMILTONIANS
    assert hamiltonian_for(chain_graph(2), J) is not first
    clear_caches()
    assert len(_HAMILTONIANS) == 0
