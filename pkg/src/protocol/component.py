"""
Butterfly-metrology circuits.

Abstract mode follows the operator algebra literally:
    U = exp(-iHt) X_mask,   |psi_B> = U^dag L_V U |0>,   |psi> = U exp(-i phi S_z) |psi_B>.
Hardware mode realizes the same state with forward evolutions only: the
backward block is Sigma_Z exp(-iHt) Sigma_Z, the phase is written by a
per-qubit Z layer (four cases by color and initial excitation), and sigma_x
is read out as sigma_z after a Y/2 pulse. The Y/2 pulse is Ry(-pi/2) in the
exp(-i theta sigma/2) convention.
"""
from collections import OrderedDict
from typing import Callable, Optional, Sequence

import numpy as np

from src.engine.circuit import (
    Circuit,
    Evolution,
    GateLayer,
    Observable,
    PhaseEncoding,
    measure,
    run_circuit,
)
from src.engine.gates import I2, PAULI_X, PAULI_Z, local_superposition, rx, ry, rz
from src.engine.graph import QubitGraph
from src.engine.hamiltonian import Hamiltonian, build_hamiltonian, propagate_array
from src.engine.state import (
    StateVector,
    apply_1q_array,
    expectation_array,
    popcounts,
    x_layer_permutation,
)
from src.utils.errors import NotBipartiteError
from src.utils.logger import get_logger
from .schema import ProtocolSpec, XMask

logger = get_logger(__name__)

_INSERT_GATES = {
    "x": PAULI_X,
    "rx_plus": rx(np.pi / 2),
    "rx_minus": rx(-np.pi / 2),
    "identity": I2,
}


# Prepared Hamiltonians kept per process, least recently used evicted first.
MAX_CACHED_HAMILTONIANS = 8
_HAMILTONIANS: OrderedDict[tuple[QubitGraph, float], Hamiltonian] = OrderedDict()


def _remember(key: tuple[QubitGraph, float], hamiltonian: Hamiltonian) -> None:
    _HAMILTONIANS[key] = hamiltonian
    if len(_HAMILTONIANS) > MAX_CACHED_HAMILTONIANS:
        (graph, j), _ = _HAMILTONIANS.popitem(last=False)
        logger.debug(f"Evicted cached Hamiltonian for {graph.name} (J={j:.6g})")


def hamiltonian_for(graph: QubitGraph, j: float) -> Hamiltonian:
    """Shared, prepared Hamiltonian per (graph, J), cached per process."""
    key = (graph, float(j))
    if key in _HAMILTONIANS:
        _HAMILTONIANS.move_to_end(key)
        return _HAMILTONIANS[key]
    hamiltonian = build_hamiltonian(graph, j).prepare()
    _remember(key, hamiltonian)
    return hamiltonian


def register_hamiltonian(hamiltonian: Hamiltonian) -> None:
    """Seeds the cache with an already diagonalized instance (e.g. received by a worker)."""
    key = (hamiltonian.graph, hamiltonian.j)
    if key not in _HAMILTONIANS:
        _remember(key, hamiltonian)


def clear_caches() -> None:
    """Drops every cached Hamiltonian and its propagators."""
    for hamiltonian in _HAMILTONIANS.values():
        hamiltonian.clear_propagators()
    _HAMILTONIANS.clear()


def local_operator(spec: ProtocolSpec) -> np.ndarray:
    if spec.insert_gate is None:
        return local_superposition(spec.lv_sign)
    return _INSERT_GATES[spec.insert_gate]


def encoding_angles(color: str, excited: bool, phi: float) -> float:
    """
    Rz angle written on one qubit in hardware mode. X conjugation flips the
    sign of Rz(phi); a red qubit also absorbs the Z of Sigma_Z as Rz(pi).
    """
    angle = -phi if excited else phi
    if color == "red":
        angle += np.pi
    return float(angle)


def _x_layer(mask: XMask, label: str = "x_mask") -> GateLayer:
    return GateLayer(tuple((q, PAULI_X) for q, flag in enumerate(mask) if flag), label=label)


def _check_mask(spec: ProtocolSpec, mask: XMask) -> XMask:
    mask = tuple(bool(flag) for flag in mask)
    if len(mask) != spec.n_qubits:
        raise ValueError(f"Mask length {len(mask)} does not match {spec.n_qubits} qubits")
    return mask


def _sign_flip_gates(graph: QubitGraph) -> tuple[tuple[int, np.ndarray], ...]:
    return tuple((q, PAULI_Z) for q in graph.red_qubits)


def _require_bipartite(spec: ProtocolSpec) -> None:
    graph = spec.graph
    if any(graph.coloring[a] == graph.coloring[b] for a, b in graph.edges):
        raise NotBipartiteError("Hardware mode needs a proper checkerboard coloring")


def sensing_circuit(
    spec: ProtocolSpec, t: float, phi: float, mask: XMask, mode: Optional[str] = None
) -> Circuit:
    mask = _check_mask(spec, mask)
    mode = mode or spec.mode
    center = spec.center
    insert = local_operator(spec)
    if mode == "abstract":
        operations = (
            _x_layer(mask),
            Evolution(t),
            GateLayer(((center, insert),), label="insert"),
            Evolution(-t),
            _x_layer(mask),
            PhaseEncoding(phi),
            _x_layer(mask),
            Evolution(t),
        )
        observable = Observable("x", center)
    else:
        _require_bipartite(spec)
        # Insert before Sigma_Z: matters only when the center qubit is red.
        reversal = ((center, insert),) + _sign_flip_gates(spec.graph)
        encoding = tuple(
            (q, rz(encoding_angles(spec.graph.coloring[q], mask[q], phi)))
            for q in range(spec.n_qubits)
        )
        operations = (
            _x_layer(mask),
            Evolution(t),
            GateLayer(reversal, label="sign_flip_insert"),
            Evolution(t),
            GateLayer(encoding, label="z_encoding"),
            Evolution(t),
            GateLayer(((center, ry(-np.pi / 2)),), label="readout_y2"),
        )
        observable = Observable("z", center)
    return Circuit(spec.n_qubits, operations, observable, name=f"sensing_{mode}")


def otoc_circuit(
    spec: ProtocolSpec,
    t: float,
    target: int,
    mask: XMask,
    operator: np.ndarray = PAULI_X,
    mode: Optional[str] = None,
    name: str = "otoc",
) -> Circuit:
    mask = _check_mask(spec, mask)
    mode = mode or spec.mode
    center = spec.center
    if mode == "abstract":
        operations = (
            _x_layer(mask),
            Evolution(t),
            GateLayer(((center, operator),), label="insert"),
            Evolution(-t),
            _x_layer(mask),
        )
    else:
        _require_bipartite(spec)
        sign_flip = _sign_flip_gates(spec.graph)
        operations = (
            _x_layer(mask),
            Evolution(t),
            GateLayer(((center, operator),) + sign_flip, label="sign_flip_insert"),
            Evolution(t),
            GateLayer(sign_flip + _x_layer(mask).gates, label="sign_flip_x_mask"),
        )
    return Circuit(spec.n_qubits, operations, Observable("z", target), name=f"{name}_{mode}")


def reference_circuit(
    spec: ProtocolSpec, t: float, mask: XMask, block_factor: float = 1.5, mode: Optional[str] = None
) -> Circuit:
    """V = I echo with each U block lasting block_factor * t."""
    return otoc_circuit(
        spec, block_factor * t, spec.center, mask, operator=I2, mode=mode, name="reference"
    )


def _run(spec: ProtocolSpec, circuit: Circuit) -> float:
    state = run_circuit(circuit, hamiltonian_for(spec.graph, spec.j), spec.evolution)
    return measure(state, circuit.observable)


def run_sensing_abstract(spec: ProtocolSpec, t: float, phi: float, mask: XMask) -> float:
    """<sigma_x> of the center qubit after U exp(-i phi S_z) U^dag L_V U |0>."""
    return _run(spec, sensing_circuit(spec, t, phi, mask, mode="abstract"))


def run_sensing_hardware(spec: ProtocolSpec, t: float, phi: float, mask: XMask) -> float:
    """Forward-only pulse sequence; equals run_sensing_abstract."""
    return _run(spec, sensing_circuit(spec, t, phi, mask, mode="hardware"))


def run_sensing(spec: ProtocolSpec, t: float, phi: float, mask: XMask) -> float:
    return _run(spec, sensing_circuit(spec, t, phi, mask))


def run_otoc(spec: ProtocolSpec, t: float, target: int, mask: XMask, operator: np.ndarray = PAULI_X) -> float:
    """<0|V(t) sigma_z^target V(t)|0>, the OTOC with W = sigma_z^target."""
    if not 0 <= target < spec.n_qubits:
        raise ValueError(f"Target qubit {target} out of range")
    return _run(spec, otoc_circuit(spec, t, target, mask, operator=operator))


def run_reference(spec: ProtocolSpec, t: float, mask: Optional[XMask] = None, block_factor: float = 1.5) -> float:
    mask = mask if mask is not None else (False,) * spec.n_qubits
    return _run(spec, reference_circuit(spec, t, mask, block_factor=block_factor))


def butterfly_state(spec: ProtocolSpec, t: float, mask: XMask) -> StateVector:
    """U^dag L_V U |0>, X factors included."""
    mask = _check_mask(spec, mask)
    circuit = Circuit(
        spec.n_qubits,
        (
            _x_layer(mask),
            Evolution(t),
            GateLayer(((spec.center, local_operator(spec)),), label="insert"),
            Evolution(-t),
            _x_layer(mask),
        ),
        Observable("x", spec.center),
        name="butterfly_state",
    )
    return run_circuit(circuit, hamiltonian_for(spec.graph, spec.j), spec.evolution)


def scrambled_state(spec: ProtocolSpec, t: float, mask: XMask) -> StateVector:
    """V(t)|0> = U^dag X_center U |0>."""
    circuit = otoc_circuit(spec, t, spec.center, mask, mode="abstract")
    return run_circuit(circuit, hamiltonian_for(spec.graph, spec.j), spec.evolution)


def otoc_profile(spec: ProtocolSpec, t: float, mask: XMask) -> np.ndarray:
    """O_j(t) for every qubit j from one V(t)|0> state."""
    probabilities = np.abs(scrambled_state(spec, t, mask).amplitudes) ** 2
    index = np.arange(probabilities.size)
    return np.array(
        [probabilities @ (1 - 2 * ((index >> q) & 1)) for q in range(spec.n_qubits)],
        dtype=np.float64,
    )


def heisenberg_operator(spec: ProtocolSpec, t: float, mask: XMask) -> Callable[[np.ndarray], np.ndarray]:
    """Action of V(t) = X_mask exp(iHt) X_center exp(-iHt) X_mask on amplitude arrays."""
    mask = _check_mask(spec, mask)
    hamiltonian = hamiltonian_for(spec.graph, spec.j)
    permutation = x_layer_permutation(spec.n_qubits, np.array(mask))

    def apply(amplitudes: np.ndarray) -> np.ndarray:
        out = amplitudes[..., permutation]
        out = propagate_array(out, hamiltonian, t, spec.evolution)
        out = apply_1q_array(out, spec.n_qubits, spec.center, PAULI_X)
        out = propagate_array(out, hamiltonian, -t, spec.evolution)
        return out[..., permutation]

    return apply


def sensing_curve(spec: ProtocolSpec, t: float, phis: Sequence[float], mask: XMask) -> np.ndarray:
    """
    <sigma_x>(phi) for a whole phase grid. In abstract mode the butterfly
    state is prepared once and the phase grid is propagated as one batch.
    """
    phis = np.asarray(phis, dtype=np.float64)
    if spec.mode == "hardware":
        return np.array([run_sensing_hardware(spec, t, phi, mask) for phi in phis])

    mask = _check_mask(spec, mask)
    hamiltonian = hamiltonian_for(spec.graph, spec.j)
    permutation = x_layer_permutation(spec.n_qubits, np.array(mask))
    # psi_B already carries both X_mask layers; only the post-phase one remains
    psi_b = butterfly_state(spec, t, mask).amplitudes
    sz_phase = np.exp(-1j * np.outer(phis, (spec.n_qubits - 2 * popcounts(spec.n_qubits)) / 2.0))
    batch = (psi_b[None, :] * sz_phase)[:, permutation]
    batch = propagate_array(batch, hamiltonian, t, spec.evolution)
    return expectation_array(batch, spec.n_qubits, "x", spec.center)


__all__ = [
    "butterfly_state",
    "clear_caches",
    "encoding_angles",
    "hamiltonian_for",
    "heisenberg_operator",
    "local_operator",
    "otoc_circuit",
    "otoc_profile",
    "reference_circuit",
    "register_hamiltonian",
    "run_otoc",
    "run_reference",
    "run_sensing",
    "run_sensing_abstract",
    "run_sensing_hardware",
    "scrambled_state",
    "sensing_circuit",
    "sensing_curve",
]
