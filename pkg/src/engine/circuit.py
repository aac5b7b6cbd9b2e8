"""
Circuit descriptions shared by the noiseless engine and the noise simulators.

A circuit is a sequence of gate layers (simultaneous single-qubit gates,
occupying one gate window), Hamiltonian evolutions, and diagonal phase
encodings, closed by a single-qubit Pauli measurement.
"""
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .hamiltonian import Hamiltonian, propagate_array
from .schema import ExactEigen, EvolutionMethod
from .state import (
    StateVector,
    apply_1q_array,
    assert_normalized,
    expectation_array,
    phase_encoding_diagonal,
    zero_state,
)


@dataclass(frozen=True)
class GateLayer:
    gates: tuple[tuple[int, np.ndarray], ...]
    label: str = "layer"


@dataclass(frozen=True)
class Evolution:
    t: float


@dataclass(frozen=True)
class PhaseEncoding:
    phi: float


Operation = Union[GateLayer, Evolution, PhaseEncoding]


@dataclass(frozen=True)
class Observable:
    pauli: Literal["x", "y", "z"]
    qubit: int


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    operations: tuple[Operation, ...]
    observable: Observable
    name: str = "circuit"
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def total_evolution_time(self) -> float:
        return sum(abs(op.t) for op in self.operations if isinstance(op, Evolution))


def apply_operation(
    amplitudes: np.ndarray,
    operation: Operation,
    hamiltonian: Hamiltonian,
    method: EvolutionMethod = ExactEigen(),
) -> np.ndarray:
    """Applies one operation along the trailing axis (single states or batches)."""
    n_qubits = hamiltonian.n_qubits
    if isinstance(operation, Evolution):
        return propagate_array(amplitudes, hamiltonian, operation.t, method)
    if isinstance(operation, PhaseEncoding):
        return amplitudes * phase_encoding_diagonal(n_qubits, operation.phi)
    if isinstance(operation, GateLayer):
        out = amplitudes
        for qubit, gate in operation.gates:
            out = apply_1q_array(out, n_qubits, qubit, gate)
        return out
    raise TypeError(f"Unsupported circuit operation: {operation!r}")


def run_circuit(
    circuit: Circuit,
    hamiltonian: Hamiltonian,
    method: EvolutionMethod = ExactEigen(),
    initial: StateVector | None = None,
) -> StateVector:
    """Noiseless execution from |0...0> (or `initial`)."""
    state = initial if initial is not None else zero_state(circuit.n_qubits)
    amplitudes = state.amplitudes
    for operation in circuit.operations:
        amplitudes = apply_operation(amplitudes, operation, hamiltonian, method)
    result = state.with_amplitudes(amplitudes)
    assert_normalized(result)
    return result


def measure(state: StateVector, observable: Observable) -> float:
    return float(expectation_array(state.amplitudes, state.n_qubits, observable.pauli, observable.qubit))
