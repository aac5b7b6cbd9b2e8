"""
Z-gate amplitude calibration: a cubic spline through measured
(Z_amp, phi) knots and its numerical inverse on a monotone branch.
"""
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from src.utils.logger import get_logger
from .schema import SplineCalibration

logger = get_logger(__name__)

INVERSION_XTOL = 1e-9
_MONOTONE_GRID = 2001


class ZGateSplineCalibrator(BaseEstimator):
    """Fits phi = f(Z_amp) and inverts it for a target phase."""
    def __init__(self, branch: Optional[tuple[float, float]] = None):
        self.branch = branch

    def fit(self, z_amps, phis) -> "ZGateSplineCalibrator":
        self.calibration_ = SplineCalibration(
            z_amps=tuple(float(z) for z in z_amps),
            phis=tuple(float(p) for p in phis),
            branch=self.branch,
        )
        self.spline_ = CubicSpline(self.calibration_.z_amps, self.calibration_.phis)
        logger.info(f"Z-gate spline fitted on {len(self.calibration_.z_amps)} knots")
        return self

    def predict(self, z_amps) -> np.ndarray:
        check_is_fitted(self, "spline_")
        return self.spline_(np.asarray(z_amps, dtype=np.float64))

    def inverse(self, phi_target: float) -> float:
        check_is_fitted(self, "spline_")
        return zgate_invert(self.calibration_, phi_target, spline=self.spline_)


def zgate_calibrate(z_amps, phis, branch: Optional[tuple[float, float]] = None) -> SplineCalibration:
    return ZGateSplineCalibrator(branch=branch).fit(z_amps, phis).calibration_


def zgate_invert(
    calibration: SplineCalibration,
    phi_target: float,
    spline: Optional[Callable] = None,
) -> float:
    """
    Z_amp with f(Z_amp) = phi_target, by bracketed root finding on the
    monotone branch.

    Raises:
        ValueError: If the branch is not monotone or phi_target is outside its range.
    """
    spline = spline or CubicSpline(calibration.z_amps, calibration.phis)
    lo, hi = calibration.branch or (calibration.z_amps[0], calibration.z_amps[-1])

    grid = np.linspace(lo, hi, _MONOTONE_GRID)
    values = spline(grid)
    steps = np.diff(values)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError(f"Spline is not monotone on [{lo}, {hi}]; restrict the branch")

    f_lo, f_hi = float(spline(lo)), float(spline(hi))
    if not min(f_lo, f_hi) <= phi_target <= max(f_lo, f_hi):
        raise ValueError(
            f"Target phase {phi_target} outside the calibrated range [{min(f_lo, f_hi)}, {max(f_lo, f_hi)}]"
        )
    if phi_target == f_lo:
        return float(lo)
    if phi_target == f_hi:
        return float(hi)
    return float(brentq(lambda z: float(spline(z)) - phi_target, lo, hi, xtol=INVERSION_XTOL))


def zgate_fringe(z_amps, relation: Callable[[np.ndarray], np.ndarray], n_segments: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """
    Ramsey excited populations after n_segments identical Z pulses, read out
    with X/2 and Y/2 analysis pulses: ((1 - cos(M phi))/2, (1 - sin(M phi))/2).
    Repeating the pulse amplifies small phases M-fold.
    """
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    total = n_segments * np.asarray(relation(np.asarray(z_amps, dtype=np.float64)), dtype=np.float64)
    return (1.0 - np.cos(total)) / 2.0, (1.0 - np.sin(total)) / 2.0


def extract_fringe_knots(z_amps, p_cos, p_sin, n_segments: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """(Z_amp, phi) knots from two-quadrature fringes by phase unwrapping along Z_amp."""
    z_amps = np.asarray(z_amps, dtype=np.float64)
    order = np.argsort(z_amps)
    wrapped = np.arctan2(1.0 - 2.0 * np.asarray(p_sin)[order], 1.0 - 2.0 * np.asarray(p_cos)[order])
    return z_amps[order], np.unwrap(wrapped) / n_segments
