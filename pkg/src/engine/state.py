"""
Statevector representation and gate kernels.

Little-endian layout: qubit k is bit k of the basis index, bit value 1 is
|1>, and sigma_z|0> = +|0>. Kernels operate on the trailing axis of an
amplitude array so the same code serves single states and trajectory
batches of shape (n_batch, 2**n).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.utils.logger import get_logger
from .gates import is_unitary

logger = get_logger(__name__)

# 2**20 complex128 amplitudes = 16 MiB per state; dense Hamiltonians are capped separately.
MAX_QUBITS = 20


@dataclass(frozen=True)
class StateVector:
    """A normalized register state; treated as a value (operations return new states)."""
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError(
                f"Expected {2 ** self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amplitudes: np.ndarray) -> "StateVector":
        return StateVector(self.n_qubits, np.asarray(amplitudes, dtype=np.complex128))


def _check_qubit_count(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"Qubit count must be in [1, {MAX_QUBITS}], got {n}")


def _check_qubit_index(n_qubits: int, qubit: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"Qubit index {qubit} out of range for {n_qubits} qubits")


def zero_state(n: int) -> StateVector:
    """The fully polarized state |0...0>."""
    _check_qubit_count(n)
    amplitudes = np.zeros(2 ** n, dtype=np.complex128)
    amplitudes[0] = 1.0
    return StateVector(n, amplitudes)


def basis_state(n: int, index: int) -> StateVector:
    _check_qubit_count(n)
    if not 0 <= index < 2 ** n:
        raise ValueError(f"Basis index {index} out of range for {n} qubits")
    amplitudes = np.zeros(2 ** n, dtype=np.complex128)
    amplitudes[index] = 1.0
    return StateVector(n, amplitudes)


@lru_cache(maxsize=32)
def popcounts(n: int) -> np.ndarray:
    """Number of set bits of every basis index (read-only)."""
    counts = np.bitwise_count(np.arange(2 ** n, dtype=np.uint64)).astype(np.int64)
    counts.setflags(write=False)
    return counts


@lru_cache(maxsize=32)
def sz_diagonal(n: int) -> np.ndarray:
    """Diagonal of S_z = (1/2) sum_k sigma_z^k: (n - 2 * popcount) / 2."""
    diag = (n - 2 * popcounts(n)) / 2.0
    diag.setflags(write=False)
    return diag


def apply_1q_array(amplitudes: np.ndarray, n_qubits: int, qubit: int, gate: np.ndarray) -> np.ndarray:
    """Applies a 2x2 gate on `qubit` along the trailing axis; returns a new array."""
    batch_shape = amplitudes.shape[:-1]
    tensor = amplitudes.reshape(batch_shape + (-1, 2, 2 ** qubit))
    out = np.einsum("ab,...ibj->...iaj", gate, tensor)
    return out.reshape(batch_shape + (2 ** n_qubits,))


def apply_1q(state: StateVector, qubit: int, gate: np.ndarray) -> StateVector:
    """Applies `gate` (any 2x2 unitary) to one qubit of `state`."""
    _check_qubit_index(state.n_qubits, qubit)
    gate = np.asarray(gate, dtype=np.complex128)
    if not is_unitary(gate):
        raise ValueError(f"Gate is not a 2x2 unitary within 1e-10: {gate!r}")
    return state.with_amplitudes(apply_1q_array(state.amplitudes, state.n_qubits, qubit, gate))


def x_layer_permutation(n_qubits: int, mask: np.ndarray) -> np.ndarray:
    """Index permutation realizing X on every qubit where `mask` is true."""
    flip = int(sum(1 << k for k, flag in enumerate(mask) if flag))
    return np.arange(2 ** n_qubits) ^ flip


def apply_x_layer(state: StateVector, mask) -> StateVector:
    """X on every masked qubit, executed as one index permutation."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (state.n_qubits,):
        raise ValueError(f"Mask length {mask.shape} does not match {state.n_qubits} qubits")
    return state.with_amplitudes(state.amplitudes[x_layer_permutation(state.n_qubits, mask)])


def phase_encoding_diagonal(n_qubits: int, phi: float) -> np.ndarray:
    return np.exp(-1j * phi * sz_diagonal(n_qubits))


def apply_phase_encoding(state: StateVector, phi: float) -> StateVector:
    """exp(-i phi S_z) as a single diagonal pass."""
    return state.with_amplitudes(state.amplitudes * phase_encoding_diagonal(state.n_qubits, phi))


def expectation_array(amplitudes: np.ndarray, n_qubits: int, pauli: str, qubit: int) -> np.ndarray:
    """<sigma_pauli> on `qubit` for each state along the leading axes (unnormalized input allowed)."""
    batch_shape = amplitudes.shape[:-1]
    tensor = amplitudes.reshape(batch_shape + (-1, 2, 2 ** qubit))
    a0, a1 = tensor[..., 0, :], tensor[..., 1, :]
    axes = (-2, -1)
    if pauli == "z":
        value = np.sum(np.abs(a0) ** 2 - np.abs(a1) ** 2, axis=axes)
    elif pauli == "x":
        value = 2.0 * np.sum(np.real(np.conj(a0) * a1), axis=axes)
    elif pauli == "y":
        value = 2.0 * np.sum(np.imag(np.conj(a0) * a1), axis=axes)
    else:
        raise ValueError(f"Unknown Pauli '{pauli}'")
    norm = np.sum(np.abs(amplitudes) ** 2, axis=-1)
    return value / norm


def expectation(state: StateVector, pauli: str, qubit: int) -> float:
    _check_qubit_index(state.n_qubits, qubit)
    return float(expectation_array(state.amplitudes, state.n_qubits, pauli, qubit))


def expectation_sz(state: StateVector) -> float:
    """<S_z> of the collective spin."""
    probabilities = np.abs(state.amplitudes) ** 2
    return float(probabilities @ sz_diagonal(state.n_qubits))


def assert_normalized(state: StateVector, atol: float = 1e-9) -> None:
    drift = abs(state.norm() - 1.0)
    if drift >= atol:
        logger.error(f"State norm drifted by {drift:.3e}")
        raise ValueError(f"State is not normalized (|norm - 1| = {drift:.3e})")
