"""
XY Hamiltonian H = J sum_<m,n> (XX + YY) and its time evolution.

Each edge term couples |01> and |10> of its pair with matrix element 2J, so
H is real symmetric, conserves the excitation number, and anticommutes with
the sign-flip layer Sigma_Z (Z on every red qubit) of a bipartite graph.
"""
import math
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from src.utils.errors import NumericalError
from src.utils.logger import get_logger
from .graph import QubitGraph
from .schema import ExactEigen, EvolutionMethod, Trotter2
from .state import StateVector, popcounts

logger = get_logger(__name__)

# 2**13 x 2**13 float64 = 512 MiB; beyond this use Trotter2.
EXACT_MAX_QUBITS = 13

# Distinct durations kept per Hamiltonian; least recently used are evicted.
MAX_CACHED_PROPAGATORS = 64


@dataclass(frozen=True)
class EdgeTerm:
    a: int
    b: int
    j: float


@dataclass(frozen=True)
class Spectrum:
    energies: np.ndarray
    vectors: np.ndarray  # columns are orthonormal real eigenvectors


class Hamiltonian:
    """
    XY Hamiltonian over a coupling graph; J in rad/ns.

    The dense matrix and spectrum are computed lazily and cached. Call
    `prepare()` before handing the instance to parallel workers so every
    worker receives the populated cache.
    """
    def __init__(self, graph: QubitGraph, j: float):
        self.graph = graph
        self.j = float(j)
        self.terms = tuple(EdgeTerm(a, b, self.j) for a, b in graph.edges)
        self._propagators: OrderedDict[float, np.ndarray] = OrderedDict()

    @property
    def n_qubits(self) -> int:
        return self.graph.n_qubits

    @cached_property
    def _pair_indices(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per edge: indices with (bit a, bit b) = (0, 1) and their (1, 0) partners."""
        index = np.arange(2 ** self.n_qubits)
        pairs = []
        for term in self.terms:
            bit_a = (index >> term.a) & 1
            bit_b = (index >> term.b) & 1
            i01 = index[(bit_a == 0) & (bit_b == 1)]
            pairs.append((i01, i01 ^ ((1 << term.a) | (1 << term.b))))
        return tuple(pairs)

    @cached_property
    def dense(self) -> np.ndarray:
        if self.n_qubits > EXACT_MAX_QUBITS:
            raise ValueError(
                f"Dense Hamiltonian limited to {EXACT_MAX_QUBITS} qubits; use Trotter2 evolution"
            )
        dim = 2 ** self.n_qubits
        matrix = np.zeros((dim, dim), dtype=np.float64)
        for (i01, i10), term in zip(self._pair_indices, self.terms):
            matrix[i01, i10] += 2.0 * term.j
            matrix[i10, i01] += 2.0 * term.j
        return matrix

    @cached_property
    def spectrum(self) -> Spectrum:
        matrix = self.dense
        if not np.array_equal(matrix, matrix.T):
            raise NumericalError("Hamiltonian matrix is not symmetric; cannot diagonalize")
        try:
            energies, vectors = scipy.linalg.eigh(matrix)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericalError(f"Eigendecomposition failed: {e}") from e
        logger.info(f"Diagonalized {matrix.shape[0]}x{matrix.shape[0]} XY Hamiltonian (J={self.j:.6g} rad/ns)")
        return Spectrum(energies=energies, vectors=vectors)

    def prepare(self) -> "Hamiltonian":
        """Populates the spectrum cache (dense-sized registers only)."""
        if self.n_qubits <= EXACT_MAX_QUBITS:
            _ = self.spectrum
        return self

    @cached_property
    def sign_flip_diagonal(self) -> np.ndarray:
        """Diagonal of Sigma_Z: (-1)**(number of set red bits)."""
        index = np.arange(2 ** self.n_qubits, dtype=np.uint64)
        red_bits = np.bitwise_count(index & np.uint64(self.graph.red_mask)).astype(np.int64)
        return np.where(red_bits % 2 == 0, 1.0, -1.0)

    @cached_property
    def excitation_number(self) -> np.ndarray:
        return popcounts(self.n_qubits)

    def propagator(self, t: float) -> np.ndarray:
        """Dense exp(-iHt), cached per t (used for repeated noise slices)."""
        key = float(t)
        if key in self._propagators:
            self._propagators.move_to_end(key)
            return self._propagators[key]
        spec = self.spectrum
        matrix = (spec.vectors * np.exp(-1j * spec.energies * key)) @ spec.vectors.T
        self._propagators[key] = matrix
        if len(self._propagators) > MAX_CACHED_PROPAGATORS:
            self._propagators.popitem(last=False)
        return matrix

    def clear_propagators(self) -> None:
        self._propagators.clear()

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_propagators"] = OrderedDict()
        return state


def build_hamiltonian(graph: QubitGraph, j: float) -> Hamiltonian:
    """One (XX + YY) term per edge, scaled by J (rad/ns)."""
    return Hamiltonian(graph, j)


def _evolve_exact(amplitudes: np.ndarray, hamiltonian: Hamiltonian, t: float) -> np.ndarray:
    spec = hamiltonian.spectrum
    coefficients = amplitudes @ spec.vectors  # eigenbasis (rows for batches)
    coefficients = coefficients * np.exp(-1j * spec.energies * t)
    return coefficients @ spec.vectors.T


def _apply_edge_rotation(amplitudes: np.ndarray, i01: np.ndarray, i10: np.ndarray, theta: float) -> None:
    """In place: exp(-i theta (XX + YY)) on one pair, cos(2 theta) / -i sin(2 theta) in {|01>, |10>}."""
    c, s = math.cos(2.0 * theta), math.sin(2.0 * theta)
    v01 = amplitudes[..., i01]
    v10 = amplitudes[..., i10]
    amplitudes[..., i01] = c * v01 - 1j * s * v10
    amplitudes[..., i10] = c * v10 - 1j * s * v01


def _evolve_trotter2(amplitudes: np.ndarray, hamiltonian: Hamiltonian, t: float, dt: float) -> np.ndarray:
    n_steps = max(1, math.ceil(abs(t) / dt - 1e-12))
    tau = t / n_steps
    pairs = hamiltonian._pair_indices
    ordered = list(zip(pairs, hamiltonian.terms))
    out = np.array(amplitudes, dtype=np.complex128, copy=True)
    for _ in range(n_steps):
        for (i01, i10), term in ordered:
            _apply_edge_rotation(out, i01, i10, term.j * tau / 2)
        for (i01, i10), term in reversed(ordered):
            _apply_edge_rotation(out, i01, i10, term.j * tau / 2)
    return out


def propagate_array(
    amplitudes: np.ndarray,
    hamiltonian: Hamiltonian,
    t: float,
    method: EvolutionMethod = ExactEigen(),
) -> np.ndarray:
    """exp(-iHt) applied along the trailing axis of an amplitude array."""
    if t == 0:
        return np.array(amplitudes, dtype=np.complex128, copy=True)
    if isinstance(method, Trotter2):
        return _evolve_trotter2(amplitudes, hamiltonian, t, method.dt)
    return _evolve_exact(amplitudes, hamiltonian, t)


def evolve(
    state: StateVector,
    hamiltonian: Hamiltonian,
    t: float,
    method: EvolutionMethod = ExactEigen(),
) -> StateVector:
    """exp(-iHt)|psi>; negative t evolves backward."""
    if state.n_qubits != hamiltonian.n_qubits:
        raise ValueError(
            f"State has {state.n_qubits} qubits, Hamiltonian acts on {hamiltonian.n_qubits}"
        )
    return state.with_amplitudes(propagate_array(state.amplitudes, hamiltonian, t, method))


def apply_sign_flip(state: StateVector, hamiltonian: Hamiltonian) -> StateVector:
    """Sigma_Z = product of Z over red qubits."""
    return state.with_amplitudes(state.amplitudes * hamiltonian.sign_flip_diagonal)
