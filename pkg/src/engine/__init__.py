"""
Statevector engine: states, gates, XY Hamiltonian, exact and Trotterized evolution, graphs.
"""
from .circuit import Circuit, Evolution, GateLayer, Observable, PhaseEncoding, measure, run_circuit
from .gates import PAULI_X, PAULI_Y, PAULI_Z, local_superposition, rx, ry, rz
from .graph import (
    QubitGraph,
    chain_graph,
    checkerboard_coloring,
    graph_center,
    graph_distance,
    lattice_graph,
    preset_graph,
)
from .hamiltonian import (
    EXACT_MAX_QUBITS,
    Hamiltonian,
    apply_sign_flip,
    build_hamiltonian,
    evolve,
    propagate_array,
)
from .schema import EvolutionMethod, ExactEigen, Trotter2
from .state import (
    MAX_QUBITS,
    StateVector,
    apply_1q,
    apply_phase_encoding,
    apply_x_layer,
    basis_state,
    expectation,
    expectation_sz,
    zero_state,
)

__all__ = [
    "Circuit", "Evolution", "GateLayer", "Observable", "PhaseEncoding", "measure", "run_circuit",
    "PAULI_X", "PAULI_Y", "PAULI_Z", "local_superposition", "rx", "ry", "rz",
    "QubitGraph", "chain_graph", "checkerboard_coloring", "graph_center", "graph_distance",
    "lattice_graph", "preset_graph",
    "EXACT_MAX_QUBITS", "Hamiltonian", "apply_sign_flip", "build_hamiltonian", "evolve",
    "propagate_array",
    "EvolutionMethod", "ExactEigen", "Trotter2",
    "MAX_QUBITS", "StateVector", "apply_1q", "apply_phase_encoding", "apply_x_layer",
    "basis_state", "expectation", "expectation_sz", "zero_state",
]
