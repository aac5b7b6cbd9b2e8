"""
Reduced states, purities and the pure-state GME concurrence

    C_GME(|psi>) = min over cuts A of sqrt(2 (1 - Tr rho_A^2)).
"""
from typing import Sequence, Union

import numpy as np

from src.engine.state import StateVector
from src.utils.logger import get_logger
from .schema import Bipartition, DensityMatrix, GmeResult, bipartitions

logger = get_logger(__name__)

GME_MAX_QUBITS = 12


def _check_keep(n_qubits: int, keep: Sequence[int]) -> tuple[int, ...]:
    keep = tuple(sorted(set(int(q) for q in keep)))
    if not keep:
        raise ValueError("Partial trace needs at least one kept qubit")
    if keep[0] < 0 or keep[-1] >= n_qubits:
        raise ValueError(f"Kept qubits {keep} out of range for {n_qubits} qubits")
    return keep


def _axis(n_qubits: int, qubit: int) -> int:
    # C-order reshape puts the most significant qubit first
    return n_qubits - 1 - qubit


def _split_state(state: StateVector, keep: tuple[int, ...]) -> np.ndarray:
    """Amplitudes as a (2**|keep|, 2**rest) matrix."""
    n = state.n_qubits
    traced = [q for q in range(n) if q not in keep]
    kept_axes = [_axis(n, q) for q in reversed(keep)]
    traced_axes = [_axis(n, q) for q in reversed(traced)]
    tensor = state.amplitudes.reshape((2,) * n).transpose(kept_axes + traced_axes)
    return tensor.reshape(2 ** len(keep), -1)


def partial_trace(
    source: Union[StateVector, DensityMatrix], keep: Sequence[int]
) -> DensityMatrix:
    """Reduced density matrix on `keep`, kept qubits relabelled 0..k-1 in ascending order."""
    n = source.n_qubits
    keep = _check_keep(n, keep)
    if isinstance(source, StateVector):
        split = _split_state(source, keep)
        return DensityMatrix(len(keep), split @ split.conj().T)

    traced = [q for q in range(n) if q not in keep]
    row_axes = [_axis(n, q) for q in reversed(keep)] + [_axis(n, q) for q in reversed(traced)]
    col_axes = [n + axis for axis in row_axes]
    tensor = source.matrix.reshape((2,) * (2 * n)).transpose(row_axes + col_axes)
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    reduced = np.einsum("ajbj->ab", tensor.reshape(dk, dt, dk, dt))
    return DensityMatrix(len(keep), reduced)


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def _cut_purity(state: StateVector, cut: Bipartition) -> float:
    singular_values = np.linalg.svd(_split_state(state, cut.subset), compute_uv=False)
    return float(np.sum(singular_values ** 4))


def gme_concurrence_pure(state: StateVector) -> GmeResult:
    """Minimum over all bipartitions of sqrt(2(1 - purity)); reports the minimizing cut."""
    n = state.n_qubits
    if n > GME_MAX_QUBITS:
        raise ValueError(f"GME concurrence limited to {GME_MAX_QUBITS} qubits, got {n}")
    if n == 1:
        return GmeResult(value=0.0, cut=(0,), min_purity=1.0)

    best_cut, best_purity = None, -1.0
    for cut in bipartitions(n):
        cut_purity = _cut_purity(state, cut)
        if cut_purity > best_purity:
            best_cut, best_purity = cut, cut_purity
    value = float(np.sqrt(max(0.0, 2.0 * (1.0 - best_purity))))
    return GmeResult(value=value, cut=best_cut.subset, min_purity=best_purity)


def psd_project(matrix: Union[DensityMatrix, np.ndarray]) -> DensityMatrix:
    """Clips negative eigenvalues and renormalizes the trace."""
    raw = matrix.matrix if isinstance(matrix, DensityMatrix) else np.asarray(matrix, dtype=np.complex128)
    hermitian = 0.5 * (raw + raw.conj().T)
    eigenvalues, vectors = np.linalg.eigh(hermitian)
    clipped = np.clip(eigenvalues, 0.0, None)
    if clipped.sum() <= 0:
        raise ValueError("Matrix has no positive eigenvalues to project onto")
    clipped /= clipped.sum()
    projected = (vectors * clipped) @ vectors.conj().T
    n_qubits = int(round(np.log2(raw.shape[0])))
    return DensityMatrix(n_qubits, 0.5 * (projected + projected.conj().T))


def state_fidelity(rho: DensityMatrix, state: StateVector) -> float:
    """<psi|rho|psi>."""
    if rho.n_qubits != state.n_qubits:
        raise ValueError(f"Qubit counts differ: {rho.n_qubits} vs {state.n_qubits}")
    return float(np.real(np.vdot(state.amplitudes, rho.matrix @ state.amplitudes)))
