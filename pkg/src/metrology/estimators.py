"""
Slope and Fisher-information estimators for measured phase curves.
"""
import numpy as np
from scipy.signal import savgol_filter

from src.utils.errors import SaturationError
from src.utils.logger import get_logger
from .schema import FisherResult, MaskStatistics, PhaseCurve, SlopeEstimate

logger = get_logger(__name__)

SLOPE_WINDOW = 0.5
SLOPE_DEGREE = 5
SLOPE_AGREEMENT = 0.02
# |<sigma_x>| >= 1 - SATURATION_TOL carries no phase information.
SATURATION_TOL = 1e-3


def _zero_index(phis: np.ndarray) -> int:
    index = int(np.argmin(np.abs(phis)))
    if abs(phis[index]) > 1e-9:
        raise ValueError("Phase grid does not contain phi = 0")
    return index


def slope_at_zero(
    curve: PhaseCurve,
    window: float = SLOPE_WINDOW,
    degree: int = SLOPE_DEGREE,
) -> SlopeEstimate:
    """
    d<sigma_x>/dphi at phi = 0.

    The primary value is a least-squares fit of an odd polynomial
    (phi, phi^3, ..., phi^degree) to the points with |phi| <= window. A
    central finite difference over the two nearest neighbours is kept as a
    cross-check; a disagreement above 2% is logged and flagged.
    """
    phis, values = curve.phi_array, curve.value_array
    zero = _zero_index(phis)
    if zero < 2 or phis.size - zero - 1 < 2:
        raise ValueError("Slope needs at least two phase points on each side of 0")

    finite_difference = (values[zero + 1] - values[zero - 1]) / (phis[zero + 1] - phis[zero - 1])

    in_window = np.abs(phis) <= window + 1e-12
    n_positive = int(np.count_nonzero(in_window & (phis > 0)))
    if n_positive < 2:
        in_window = np.abs(phis) <= np.abs(phis[zero + 2]) + 1e-12
        n_positive = 2
    n_terms = min((degree + 1) // 2, n_positive)
    powers = 2 * np.arange(n_terms) + 1
    design = phis[in_window, None] ** powers[None, :]
    coefficients, *_ = np.linalg.lstsq(design, values[in_window], rcond=None)
    fit = float(coefficients[0])

    scale = max(abs(fit), abs(finite_difference))
    agree = bool(abs(fit - finite_difference) <= SLOPE_AGREEMENT * scale + 1e-12)
    if not agree:
        logger.warning(
            f"Slope estimators disagree at t={curve.t}: fit={fit:.5f}, "
            f"finite difference={finite_difference:.5f}"
        )
    return SlopeEstimate(
        fit=fit,
        finite_difference=float(finite_difference),
        window=window,
        degree=int(powers[-1]),
        agree=agree,
    )


def local_derivative(curve: PhaseCurve, window_length: int = 7, polyorder: int = 3) -> np.ndarray:
    """Savitzky-Golay first derivative on the uniform phase grid."""
    n_points = len(curve.phis)
    window_length = min(window_length, n_points if n_points % 2 else n_points - 1)
    polyorder = min(polyorder, window_length - 1)
    return savgol_filter(
        curve.value_array, window_length, polyorder, deriv=1, delta=curve.step, mode="interp"
    )


def fisher_information(curve: PhaseCurve, saturation_tol: float = SATURATION_TOL) -> FisherResult:
    """
    F(phi) = (d<sigma_x>/dphi)^2 / (1 - <sigma_x>^2) for a pure two-outcome
    measurement. Points with |<sigma_x>| >= 1 - saturation_tol are reported
    as NaN.

    Raises:
        SaturationError: If the point phi = 0 itself is saturated.
    """
    phis, values = curve.phi_array, curve.value_array
    zero = _zero_index(phis)
    saturated = np.abs(values) >= 1.0 - saturation_tol
    if saturated[zero]:
        raise SaturationError(
            f"<sigma_x>(0) = {values[zero]:.6f} is saturated at t={curve.t}; "
            "Fisher information is not informative"
        )

    derivative = local_derivative(curve)
    fisher = np.full(phis.size, np.nan)
    informative = ~saturated
    fisher[informative] = derivative[informative] ** 2 / (1.0 - values[informative] ** 2)
    if saturated.any():
        logger.debug(f"{int(saturated.sum())} saturated phase points at t={curve.t}")

    slope = slope_at_zero(curve)
    f_zero_fit = slope.fit ** 2 / (1.0 - values[zero] ** 2)
    return FisherResult(
        phis=curve.phis,
        values=tuple(float(f) for f in fisher),
        f_zero=float(fisher[zero]),
        f_zero_fit=float(f_zero_fit),
        f_max=float(np.nanmax(fisher)),
        n_saturated=int(saturated.sum()),
    )


def inverted_sensitivity(fisher_at_zero: float) -> float:
    """eta^-1 = sqrt(F)."""
    if fisher_at_zero < 0:
        raise ValueError(f"Fisher information must be non-negative, got {fisher_at_zero}")
    return float(np.sqrt(fisher_at_zero))


def mask_statistics(phis, curves: np.ndarray, n_qubits: int, t: float = 0.0) -> MaskStatistics:
    """Slope and eta^-1 extracted mask by mask; spread is the population std."""
    curves = np.atleast_2d(np.asarray(curves, dtype=np.float64))
    slopes, eta_inv = [], []
    for row in curves:
        curve = PhaseCurve.from_arrays(phis, row, n_qubits=n_qubits, t=t)
        slopes.append(slope_at_zero(curve).fit)
        eta_inv.append(inverted_sensitivity(fisher_information(curve).f_zero))
    return MaskStatistics(
        slopes=tuple(slopes),
        eta_inv=tuple(eta_inv),
        slope_mean=float(np.mean(slopes)),
        slope_std=float(np.std(slopes)),
        eta_inv_mean=float(np.mean(eta_inv)),
        eta_inv_std=float(np.std(eta_inv)),
    )
