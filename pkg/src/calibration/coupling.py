"""
Coupler-mediated exchange: effective coupling formula, synthetic chevron
data and the oscillation-frequency fit that recovers J from it.
"""
import numpy as np
from scipy.optimize import curve_fit

from src.utils.errors import NoPeakError, ResonanceError
from src.utils.logger import get_logger
from .schema import OscillationFit

logger = get_logger(__name__)

RESONANCE_TOL = 1e-9
_ZERO_PAD = 8
_PEAK_DOMINANCE = 4.0


def effective_coupling(
    g12: float, g1c: float, g2c: float, omega1: float, omega2: float, omega_c: float,
    min_detuning: float = RESONANCE_TOL,
) -> float:
    """g_eff = g12 + (g1c g2c / 2) (1/(w1 - wc) + 1/(w2 - wc)), consistent angular units."""
    for name, omega in (("omega1", omega1), ("omega2", omega2)):
        if abs(omega - omega_c) <= min_detuning:
            raise ResonanceError(f"{name} = {omega} is resonant with the coupler ({omega_c})")
    return float(g12 + 0.5 * g1c * g2c * (1.0 / (omega1 - omega_c) + 1.0 / (omega2 - omega_c)))


def simulate_chevron(j: float, times, detuning: float = 0.0) -> np.ndarray:
    """
    Excited population of the initially excited qubit of a pair under
    J (XX + YY) with qubit detuning `detuning` (same angular units as J):
    1 - (4J)^2 / W^2 sin^2(W t / 2), W = sqrt((4J)^2 + detuning^2).
    """
    times = np.asarray(times, dtype=np.float64)
    exchange = 4.0 * j
    rabi = np.hypot(exchange, detuning)
    if rabi == 0:
        return np.ones_like(times)
    return 1.0 - (exchange / rabi) ** 2 * np.sin(rabi * times / 2.0) ** 2


def _sinusoid(t, amplitude, omega, phase, offset):
    return amplitude * np.cos(omega * t + phase) + offset


def fit_oscillation_frequency(times, series) -> OscillationFit:
    """
    Dominant angular frequency of a uniformly sampled series: zero-padded
    spectrum peak, parabolic refinement, then a sinusoid least-squares fit.

    Raises:
        NoPeakError: If the series has no dominant spectral peak.
    """
    times = np.asarray(times, dtype=np.float64)
    series = np.asarray(series, dtype=np.float64)
    if times.size != series.size or times.size < 4:
        raise ValueError("Need at least 4 samples with one time per sample")
    dt = float(np.mean(np.diff(times)))
    centered = series - series.mean()
    if np.ptp(series) <= 1e-12:
        raise NoPeakError("Series is constant; no oscillation to fit")

    n_fft = _ZERO_PAD * int(2 ** np.ceil(np.log2(series.size)))
    spectrum = np.abs(np.fft.rfft(centered, n=n_fft))
    spectrum[0] = 0.0
    peak = int(np.argmax(spectrum))
    if peak == 0 or spectrum[peak] < _PEAK_DOMINANCE * np.mean(spectrum[1:]):
        raise NoPeakError("No dominant spectral peak in the series")

    offset_bins = 0.0
    if 0 < peak < spectrum.size - 1:
        left, centre, right = spectrum[peak - 1:peak + 2]
        denominator = left - 2 * centre + right
        if denominator != 0:
            offset_bins = 0.5 * (left - right) / denominator
    omega0 = 2 * np.pi * (peak + offset_bins) / (n_fft * dt)

    periods = omega0 * (times[-1] - times[0]) / (2 * np.pi)
    if periods < 2:
        logger.warning(f"Only {periods:.2f} oscillation periods sampled; frequency may be biased")

    amplitude0 = 0.5 * np.ptp(series)
    phase0 = float(np.angle(np.sum(centered * np.exp(-1j * omega0 * times))))
    try:
        params, _ = curve_fit(
            _sinusoid, times, series, p0=[amplitude0, omega0, phase0, series.mean()], maxfev=10000
        )
    except RuntimeError as e:
        logger.warning(f"Sinusoid refinement failed ({e}); using the spectral estimate")
        params = np.array([amplitude0, omega0, phase0, series.mean()])

    amplitude, omega, phase, offset = (float(p) for p in params)
    if amplitude < 0:
        amplitude, phase = -amplitude, phase + np.pi
    if omega < 0:
        omega, phase = -omega, -phase
    if abs(omega - omega0) > 0.25 * omega0:
        logger.warning(f"Sinusoid fit drifted from {omega0:.5g} to {omega:.5g}; keeping the spectral estimate")
        omega = float(omega0)
    logger.info(f"Oscillation frequency {omega:.6g} rad/unit ({periods:.1f} periods)")
    return OscillationFit(omega=omega, amplitude=amplitude, offset=offset, phase=float(np.angle(np.exp(1j * phase))))


def coupling_from_chevron(times, population) -> float:
    """J = omega / 4 for an exchange pair at zero detuning."""
    return fit_oscillation_frequency(times, population).coupling
