"""
Readout assignment errors. For one qubit

    M = [[f_gg, 1 - f_ee],
         [1 - f_gg, f_ee]],   p_meas = M p_true,   p_cali = M^-1 p_meas,

and N-qubit outcome distributions use the tensor product of per-qubit M.
"""
from typing import Sequence, Union

import numpy as np

from src.utils.errors import SingularMatrixError
from src.utils.logger import get_logger

logger = get_logger(__name__)

_SINGULAR_TOL = 1e-12


def readout_matrix(f_gg: float, f_ee: float) -> np.ndarray:
    if f_gg + f_ee - 1.0 <= _SINGULAR_TOL:
        raise SingularMatrixError(
            f"Assignment matrix with f_gg={f_gg}, f_ee={f_ee} is not invertible (f_gg + f_ee <= 1)"
        )
    return np.array([[f_gg, 1.0 - f_ee], [1.0 - f_gg, f_ee]], dtype=np.float64)


def _as_matrices(matrices: Union[np.ndarray, Sequence[np.ndarray]], n_qubits: int) -> list[np.ndarray]:
    if isinstance(matrices, np.ndarray) and matrices.ndim == 2:
        matrices = [matrices] * n_qubits
    matrices = [np.asarray(m, dtype=np.float64) for m in matrices]
    if len(matrices) != n_qubits:
        raise ValueError(f"Need {n_qubits} assignment matrices, got {len(matrices)}")
    return matrices


def _apply_per_qubit(probabilities: np.ndarray, matrices: list[np.ndarray]) -> np.ndarray:
    n_qubits = len(matrices)
    tensor = probabilities.reshape((2,) * n_qubits)
    for qubit, matrix in enumerate(matrices):
        axis = n_qubits - 1 - qubit
        tensor = np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(-1)


def _n_qubits(probabilities: np.ndarray) -> int:
    n_qubits = int(round(np.log2(probabilities.size)))
    if 2 ** n_qubits != probabilities.size or n_qubits < 1:
        raise ValueError(f"Outcome distribution size {probabilities.size} is not a power of two")
    return n_qubits


def apply_readout_error(probabilities, matrices) -> np.ndarray:
    """p_meas for a 2**N outcome distribution (little-endian outcome index)."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    n_qubits = _n_qubits(probabilities)
    return _apply_per_qubit(probabilities, _as_matrices(matrices, n_qubits))


def readout_correct(measured, matrices) -> np.ndarray:
    """
    p_cali = M^-1 p_meas. Corrected quasi-probabilities outside [0, 1] are
    returned unchanged and logged.
    """
    measured = np.asarray(measured, dtype=np.float64)
    n_qubits = _n_qubits(measured)
    inverses = []
    for matrix in _as_matrices(matrices, n_qubits):
        if abs(np.linalg.det(matrix)) <= _SINGULAR_TOL:
            raise SingularMatrixError(f"Assignment matrix {matrix.tolist()} is singular")
        inverses.append(np.linalg.inv(matrix))
    corrected = _apply_per_qubit(measured, inverses)
    if np.any(corrected < -1e-12) or np.any(corrected > 1 + 1e-12):
        logger.warning(f"Readout correction produced quasi-probabilities outside [0, 1]: {corrected}")
    return corrected


def readout_expectation(value, f_gg: float, f_ee: float):
    """Measured <sigma> of one qubit given the error-free expectation."""
    return (f_gg - f_ee) + (f_gg + f_ee - 1.0) * np.asarray(value)
