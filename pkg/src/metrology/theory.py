"""
OTOC-side predictions: polarization distribution of the scrambled state,
the phase response it implies, and the reference scaling limits.

With W = V(t) (the Heisenberg-evolved center flip, X layers included) and
Phi = exp(-i phi S_z), the measured signal expands as

    <sigma_x> = (<0|W|0> + <0|W Phi^dag W Phi W|0>) / 2
                - s * Im[exp(i phi N/2) <0|W Phi W|0>],

where s = lv_sign. The last bracket only depends on P(S_z) of W|0>, and its
phi-derivative at 0 is N/2 - <S_z>, so the slope at zero is -s * eta_otoc^-1.
"""
from typing import Callable, Union

import numpy as np

from src.engine.state import StateVector, popcounts, sz_diagonal, zero_state
from src.protocol.component import heisenberg_operator, run_sensing_abstract
from src.protocol.schema import ProtocolSpec
from src.utils.logger import get_logger
from .schema import Bounds, PolarizationDist

logger = get_logger(__name__)

_OTOC_TOL = 1e-6


def eta_inv_from_otoc(otoc_values) -> float:
    """N/2 - sum_j O_j / 2 with N = number of OTOC values."""
    values = np.asarray(otoc_values, dtype=np.float64)
    if np.any(np.abs(values) > 1.0 + _OTOC_TOL):
        raise ValueError(f"OTOC values must lie in [-1, 1], got {values}")
    return float(values.size / 2.0 - values.sum() / 2.0)


def polarization_distribution(state: StateVector) -> PolarizationDist:
    """P(S_z = (N - 2k)/2) = total weight of basis states with k excitations."""
    n = state.n_qubits
    probabilities = np.abs(state.amplitudes) ** 2
    by_excitation = np.bincount(popcounts(n), weights=probabilities, minlength=n + 1)
    # ascending S_z is descending excitation number
    return PolarizationDist(
        n_qubits=n, probabilities=tuple(float(p) for p in by_excitation[::-1])
    )


def expected_v_from_distribution(
    distribution: PolarizationDist, phi: Union[float, np.ndarray]
) -> tuple[Union[float, np.ndarray], float]:
    """
    Im[exp(i phi N/2) sum_Sz exp(-i phi S_z) P(S_z)] and its derivative at
    phi = 0, N/2 - <S_z>.
    """
    n = distribution.n_qubits
    sz = distribution.sz_values
    p = np.asarray(distribution.probabilities)
    phases = np.exp(1j * np.multiply.outer(np.asarray(phi, dtype=np.float64), n / 2.0 - sz))
    value = np.imag(phases @ p)
    derivative = float(n / 2.0 - distribution.mean())
    if np.ndim(value) == 0:
        value = float(value)
    return value, derivative


def decomposition_terms(
    heisenberg: Callable[[np.ndarray], np.ndarray],
    n_qubits: int,
    phi: float,
    lv_sign: int = 1,
) -> dict[str, float]:
    """Evaluates the expansion of <sigma_x> term by term from the action of W."""
    phase = np.exp(-1j * phi * sz_diagonal(n_qubits))
    ket0 = zero_state(n_qubits).amplitudes
    w0 = heisenberg(ket0)

    w_phi_w = heisenberg(phase * w0)
    w_phid_w_phi_w = heisenberg(np.conj(phase) * w_phi_w)

    direct_w = complex(w0[0])
    echo = complex(w_phid_w_phi_w[0])
    im_term = float(np.imag(np.exp(1j * phi * n_qubits / 2.0) * w_phi_w[0]))
    first = 0.5 * (direct_w + echo).real
    return {
        "first": first,
        "im_term": im_term,
        "total": first - lv_sign * im_term,
    }


def decomposition_check(spec: ProtocolSpec, t: float, phi: float, mask) -> float:
    """|direct <sigma_x> - expansion| for one sensing point in abstract mode."""
    direct = run_sensing_abstract(spec, t, phi, mask)
    terms = decomposition_terms(
        heisenberg_operator(spec, t, mask), spec.n_qubits, phi, lv_sign=spec.lv_sign
    )
    if spec.insert_gate is not None:
        logger.warning("Expansion assumes the L_V insert; explicit insert gates will not match")
    return float(abs(direct - terms["total"]))


def bounds(n_qubits: int) -> Bounds:
    """Standard quantum limit, Heisenberg limit and the N/2 protocol target for eta^-1."""
    if n_qubits < 1:
        raise ValueError(f"N must be >= 1, got {n_qubits}")
    return Bounds(sql=float(np.sqrt(n_qubits)), hl=float(n_qubits), target=n_qubits / 2.0)
