"""
Flux-pulse distortion: forward model and multi-exponential fit.

    delta_phi(t_d) = z0 D sum_i tau_i a_i (exp(-(t_d + t_p)/tau_i) - exp(-t_d/tau_i))
"""
import itertools
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from src.utils.errors import ConvergenceError
from src.utils.logger import get_logger
from .schema import DistortionFitConfig, DistortionModel

logger = get_logger(__name__)

# Time constants may wander this far (in log units) outside the start pool.
_LOG_TAU_MARGIN = np.log(100.0)


def _basis(t_d: np.ndarray, taus: np.ndarray, z0_d: float, t_p: float) -> np.ndarray:
    """Columns: the contribution of each term per unit amplitude."""
    t = t_d[:, None]
    return z0_d * taus[None, :] * (np.exp(-(t + t_p) / taus[None, :]) - np.exp(-t / taus[None, :]))


def distortion_phase(t_d, model: DistortionModel) -> np.ndarray:
    """Phase error (rad) at delay t_d (ns) after the flux pulse."""
    t_d = np.asarray(t_d, dtype=np.float64)
    if np.any(t_d < 0):
        raise ValueError("Delays must be non-negative")
    basis = _basis(np.atleast_1d(t_d), np.asarray(model.taus_ns), model.z0_d, model.t_p_ns)
    values = basis @ np.asarray(model.amplitudes)
    return values if t_d.ndim else float(values[0])


def distortion_samples(
    model: DistortionModel, t_d, noise: float = 0.0, seed: int = 0
) -> np.ndarray:
    """Synthetic Ramsey data: the forward model plus Gaussian noise of std `noise` (rad)."""
    clean = distortion_phase(np.asarray(t_d, dtype=np.float64), model)
    if noise <= 0:
        return clean
    return clean + np.random.default_rng(seed).normal(0.0, noise, size=clean.shape)


class DistortionFitter(BaseEstimator, RegressorMixin):
    """
    Least-squares fit of the multi-exponential distortion model.

    The amplitudes enter linearly, so they are eliminated by a weighted
    linear solve at every step (variable projection) and Levenberg-Marquardt
    only searches the log time constants. Every start picks n_terms distinct
    time constants from a log-spaced pool over [tau_min, tau_max]; the start
    with the lowest weighted residual wins.
    """
    def __init__(self, config: Optional[DistortionFitConfig] = None, z0_d: float = 1.0, t_p_ns: float = 100.0):
        self.config = config
        self.z0_d = z0_d
        self.t_p_ns = t_p_ns

    @property
    def settings(self) -> DistortionFitConfig:
        return self.config if self.config is not None else DistortionFitConfig()

    def _log_tau_bounds(self) -> tuple[float, float]:
        settings = self.settings
        return (
            float(np.log(settings.tau_min_ns)) - _LOG_TAU_MARGIN,
            float(np.log(settings.tau_max_ns)) + _LOG_TAU_MARGIN,
        )

    def _project(self, log_taus: np.ndarray, t_d: np.ndarray, target: np.ndarray, weights: np.ndarray):
        """Basis and the weighted least-squares amplitudes for fixed time constants."""
        basis = _basis(t_d, np.exp(np.clip(log_taus, *self._log_tau_bounds())), self.z0_d, self.t_p_ns)
        amplitudes, *_ = np.linalg.lstsq(basis * weights[:, None], target * weights, rcond=None)
        return basis, amplitudes

    def _residuals(self, log_taus: np.ndarray, t_d: np.ndarray, target: np.ndarray, weights: np.ndarray) -> np.ndarray:
        basis, amplitudes = self._project(log_taus, t_d, target, weights)
        return (basis @ amplitudes - target) * weights

    def _start(self, taus0: np.ndarray, t_d: np.ndarray, target: np.ndarray, weights: np.ndarray):
        try:
            result = least_squares(
                self._residuals,
                np.log(taus0),
                args=(t_d, target, weights),
                method="lm",
                xtol=1e-14,
                ftol=1e-14,
                gtol=1e-14,
                max_nfev=self.settings.max_nfev,
            )
        except (ValueError, np.linalg.LinAlgError, FloatingPointError) as e:
            logger.debug(f"Start {taus0} failed: {e}")
            return None
        if not np.all(np.isfinite(result.x)) or not np.isfinite(result.cost):
            return None
        return result

    def _check_samples(self, t_d: np.ndarray, target: np.ndarray) -> None:
        n = self.settings.n_terms
        if t_d.shape != target.shape or t_d.ndim != 1:
            raise ValueError("t_d and delta_phi must be 1-D arrays of equal length")
        if t_d.size < 4 * n:
            raise ValueError(f"Need at least {4 * n} samples for {n} terms, got {t_d.size}")
        positive = t_d[t_d > 0]
        if positive.size < 2 or positive.max() / positive.min() < 100:
            raise ValueError("Delays must span at least two decades")

    @staticmethod
    def _weights(sigma, size: int) -> np.ndarray:
        if sigma is None:
            return np.ones(size)
        sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (size,))
        if np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
            raise ValueError("sigma must be positive and finite")
        return 1.0 / sigma

    def fit(self, t_d, delta_phi, sigma=None) -> "DistortionFitter":
        """
        Args:
            t_d: Delays in ns.
            delta_phi: Measured phase errors in rad.
            sigma: Optional per-sample standard deviation; residuals are weighted by 1/sigma.
        """
        t_d = np.asarray(t_d, dtype=np.float64)
        target = np.asarray(delta_phi, dtype=np.float64)
        self._check_samples(t_d, target)
        weights = self._weights(sigma, t_d.size)

        settings = self.settings
        n = settings.n_terms
        pool = np.logspace(np.log10(settings.tau_min_ns), np.log10(settings.tau_max_ns), settings.n_tau_inits)
        starts = [np.array(c)[::-1] for c in itertools.combinations(pool, n)] if n <= pool.size else [
            np.logspace(np.log10(settings.tau_max_ns), np.log10(settings.tau_min_ns), n)
        ]
        logger.info(f"Fitting {n}-term distortion model from {len(starts)} starts on {t_d.size} samples")

        results = Parallel(n_jobs=settings.n_jobs)(
            delayed(self._start)(taus0, t_d, target, weights) for taus0 in starts
        )
        results = [r for r in results if r is not None]
        if not results:
            raise ConvergenceError(f"All {len(starts)} distortion-fit starts failed")

        best = min(results, key=lambda r: r.cost)
        log_taus = np.clip(best.x, *self._log_tau_bounds())
        basis, amplitudes = self._project(log_taus, t_d, target, weights)
        self.model_ = DistortionModel(
            amplitudes=tuple(float(a) for a in amplitudes),
            taus_ns=tuple(float(tau) for tau in np.exp(log_taus)),
            z0_d=self.z0_d,
            t_p_ns=self.t_p_ns,
        ).canonical()
        scale = max(float(np.sqrt(np.mean(target ** 2))), 1e-300)
        self.relative_rms_ = float(np.sqrt(np.mean((basis @ amplitudes - target) ** 2))) / scale
        logger.info(f"Best distortion fit: taus={self.model_.taus_ns}, relative RMS={self.relative_rms_:.3e}")
        return self

    def predict(self, t_d) -> np.ndarray:
        check_is_fitted(self, "model_")
        return distortion_phase(np.asarray(t_d, dtype=np.float64), self.model_)


def fit_distortion(
    t_d, delta_phi, n_terms: int = 4, z0_d: float = 1.0, t_p_ns: float = 100.0, sigma=None, **settings
) -> DistortionModel:
    config = DistortionFitConfig(n_terms=n_terms, **settings)
    return DistortionFitter(config, z0_d=z0_d, t_p_ns=t_p_ns).fit(t_d, delta_phi, sigma=sigma).model_
