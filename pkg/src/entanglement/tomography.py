"""
Simulated local-Pauli tomography: 3**N measurement settings with multinomial
shot noise, Pauli-string estimates by marginalizing every compatible setting,
linear inversion and PSD projection.
"""
import itertools
import string
from typing import Optional

import numpy as np

from src.engine.gates import I2, PAULI_X, PAULI_Y, PAULI_Z
from src.engine.state import StateVector, apply_1q_array
from src.utils.logger import get_logger
from .component import psd_project
from .schema import DensityMatrix

logger = get_logger(__name__)

TOMOGRAPHY_MAX_QUBITS = 7

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_S_DAG = np.diag([1.0, -1.0j])
# basis code -> rotation mapping that Pauli onto Z
_ROTATIONS = {0: _HADAMARD, 1: _HADAMARD @ _S_DAG, 2: I2}
_PAULI_BASIS = np.stack([I2, PAULI_X, PAULI_Y, PAULI_Z])


def _walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """out[S] = sum_x values[x] * (-1)**popcount(x & S)."""
    out = np.array(values, dtype=np.float64, copy=True)
    h = 1
    while h < out.size:
        blocks = out.reshape(-1, 2, h)
        upper, lower = blocks[:, 0, :].copy(), blocks[:, 1, :].copy()
        blocks[:, 0, :] = upper + lower
        blocks[:, 1, :] = upper - lower
        h *= 2
    return out


def _support_masks(n_qubits: int) -> np.ndarray:
    subsets = np.arange(2 ** n_qubits)
    return ((subsets[:, None] >> np.arange(n_qubits)[None, :]) & 1).astype(np.int64)


def pauli_expectations(
    state: StateVector,
    shots_per_setting: Optional[int] = None,
    seed: int = 0,
) -> np.ndarray:
    """
    Estimated <P> for every Pauli string, indexed by sum_q code_q * 4**q with
    codes I=0, X=1, Y=2, Z=3. shots_per_setting=None uses exact Born
    probabilities.
    """
    n = state.n_qubits
    if n > TOMOGRAPHY_MAX_QUBITS:
        raise ValueError(f"Tomography limited to {TOMOGRAPHY_MAX_QUBITS} qubits, got {n}")
    if shots_per_setting is not None and shots_per_setting < 1:
        raise ValueError(f"shots_per_setting must be >= 1, got {shots_per_setting}")

    rng = np.random.default_rng(seed)
    support = _support_masks(n)
    weights = 4 ** np.arange(n)
    sums = np.zeros(4 ** n)
    counts = np.zeros(4 ** n)

    for setting in itertools.product(range(3), repeat=n):
        amplitudes = state.amplitudes
        for qubit, basis in enumerate(setting):
            amplitudes = apply_1q_array(amplitudes, n, qubit, _ROTATIONS[basis])
        probabilities = np.abs(amplitudes) ** 2
        probabilities /= probabilities.sum()
        if shots_per_setting is not None:
            probabilities = rng.multinomial(shots_per_setting, probabilities) / shots_per_setting
        parities = _walsh_hadamard(probabilities)
        codes = support * (np.asarray(setting) + 1)[None, :]
        string_index = codes @ weights
        np.add.at(sums, string_index, parities)
        np.add.at(counts, string_index, 1.0)

    return sums / counts


def linear_inversion(n_qubits: int, expectations: np.ndarray) -> np.ndarray:
    """rho = 2**-N sum_P <P> P, without positivity enforcement."""
    letters = string.ascii_letters
    coefficient_axes = letters[:n_qubits]
    row_axes = letters[n_qubits:2 * n_qubits]
    col_axes = letters[2 * n_qubits:3 * n_qubits]
    operands = ",".join(f"{c}{r}{k}" for c, r, k in zip(coefficient_axes, row_axes, col_axes))
    subscripts = f"{coefficient_axes},{operands}->{row_axes}{col_axes}"
    tensor = np.asarray(expectations, dtype=np.complex128).reshape((4,) * n_qubits)
    rho = np.einsum(subscripts, tensor, *([_PAULI_BASIS] * n_qubits))
    return rho.reshape(2 ** n_qubits, 2 ** n_qubits) / 2 ** n_qubits


def simulate_tomography(
    state: StateVector,
    shots_per_setting: Optional[int] = 5000,
    seed: int = 0,
) -> DensityMatrix:
    """Reconstructs rho from simulated measurements of all 3**N local Pauli settings."""
    logger.debug(
        f"Tomography of {state.n_qubits} qubits: {3 ** state.n_qubits} settings x {shots_per_setting} shots"
    )
    expectations = pauli_expectations(state, shots_per_setting, seed)
    return psd_project(linear_inversion(state.n_qubits, expectations))
