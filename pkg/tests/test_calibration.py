import math
from unittest.mock import patch

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from src.calibration import (
    DistortionFitConfig,
    DistortionFitter,
    DistortionModel,
    ZGateSplineCalibrator,
    coupling_from_chevron,
    distortion_phase,
    distortion_samples,
    effective_coupling,
    extract_fringe_knots,
    fit_distortion,
    fit_oscillation_frequency,
    simulate_chevron,
    zgate_calibrate,
    zgate_fringe,
    zgate_invert,
)
from src.utils.errors import ConvergenceError, NoPeakError, ResonanceError

J = 2 * np.pi * 3e-3  # rad/ns


@pytest.fixture
def delays():
    return np.logspace(0, 4, 120)


def test_distortion_phase_single_term_example():
    model = DistortionModel(amplitudes=(-0.0356,), taus_ns=(14.4,))
    expected = 14.4 * -0.0356 * (math.exp(-100 / 14.4) - 1.0)
    assert distortion_phase(0.0, model) == pytest.approx(expected)
    assert distortion_phase(0.0, model) == pytest.approx(0.512, abs=1e-3)
    assert distortion_phase(1e6, model) == pytest.approx(0.0, abs=1e-12)
    zero = DistortionModel(amplitudes=(0.0,), taus_ns=(14.4,))
    assert distortion_phase(5.0, zero) == 0.0


def test_distortion_phase_is_linear_in_terms(delays):
    full = DistortionModel.reference()
    summed = sum(
        distortion_phase(delays, DistortionModel(amplitudes=(a,), taus_ns=(tau,)))
        for a, tau in zip(full.amplitudes, full.taus_ns)
    )
    assert np.allclose(distortion_phase(delays, full), summed, atol=1e-12)


def test_distortion_rejects_negative_delay():
    with pytest.raises(ValueError):
        distortion_phase([-1.0, 2.0], DistortionModel.reference())


def test_single_term_fit_is_exact():
    model = DistortionModel(amplitudes=(-0.02,), taus_ns=(50.0,))
    t_d = np.logspace(0, 3, 40)
    fitted = fit_distortion(t_d, distortion_phase(t_d, model), n_terms=1)
    assert fitted.taus_ns[0] == pytest.approx(50.0, rel=1e-6)
    assert fitted.amplitudes[0] == pytest.approx(-0.02, rel=1e-6)


def test_four_term_fit_recovers_reference(delays):
    reference = DistortionModel.reference()
    fitter = DistortionFitter(DistortionFitConfig(n_terms=4)).fit(delays, distortion_phase(delays, reference))
    assert fitter.relative_rms_ < 1e-6
    assert np.allclose(fitter.model_.taus_ns, reference.taus_ns, rtol=0.05)
    assert np.allclose(fitter.model_.amplitudes, reference.amplitudes, rtol=0.05)
    assert np.allclose(fitter.predict(delays), distortion_phase(delays, reference), atol=1e-6)


@pytest.mark.slow
def test_noisy_fit_recovers_each_parameter():
    reference = DistortionModel.reference()
    t_d = np.logspace(0, 4, 800)
    clean = distortion_phase(t_d, reference)
    noise = 0.01 * np.sqrt(np.mean(clean ** 2))

    errors = []
    for seed in range(20):
        fitted = fit_distortion(t_d, distortion_samples(reference, t_d, noise=noise, seed=seed), n_terms=4)
        errors.append(
            np.concatenate([
                np.abs(np.array(fitted.taus_ns) / np.array(reference.taus_ns) - 1.0),
                np.abs(np.array(fitted.amplitudes) / np.array(reference.amplitudes) - 1.0),
            ])
        )
    median_errors = np.median(np.array(errors), axis=0)
    assert np.all(median_errors < 0.15), median_errors


def test_sigma_weighting_suppresses_a_corrupted_sample(delays):
    reference = DistortionModel.reference()
    samples = distortion_phase(delays, reference)
    samples[60] += 1.0
    sigma = np.ones_like(delays)
    sigma[60] = 1e6

    fitted = fit_distortion(delays, samples, n_terms=4, sigma=sigma)
    assert np.allclose(fitted.taus_ns, reference.taus_ns, rtol=0.05)
    assert np.allclose(fitted.amplitudes, reference.amplitudes, rtol=0.05)

    # a uniform sigma only rescales the loss
    uniform = fit_distortion(delays, distortion_phase(delays, reference), n_terms=4, sigma=0.3)
    assert np.allclose(uniform.taus_ns, reference.taus_ns, rtol=0.05)


def test_sigma_must_be_positive(delays):
    samples = distortion_phase(delays, DistortionModel.reference())
    with pytest.raises(ValueError, match="sigma"):
        fit_distortion(delays, samples, n_terms=1, sigma=0.0)


def test_fitters_do_not_share_default_settings():
    first, second = DistortionFitter(), DistortionFitter()
    assert first.config is None
    assert first.settings == DistortionFitConfig()
    assert first.settings is not second.settings


def test_fit_requires_enough_samples():
    with pytest.raises(ValueError):
        fit_distortion(np.logspace(0, 3, 10), np.zeros(10), n_terms=4)
    with pytest.raises(ValueError):
        fit_distortion(np.linspace(1, 10, 40), np.zeros(40), n_terms=1)


@patch("src.calibration.distortion.least_squares")
def test_all_failed_starts_raise(mock_least_squares):
    mock_least_squares.side_effect = ValueError("Residuals are not finite")
    t_d = np.logspace(0, 3, 40)
    with pytest.raises(ConvergenceError):
        fit_distortion(t_d, np.zeros(40), n_terms=1)
    assert mock_least_squares.call_count == DistortionFitConfig().n_tau_inits


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        DistortionFitter().predict([1.0])
    with pytest.raises(NotFittedError):
        ZGateSplineCalibrator().inverse(0.1)


def test_zgate_linear_inversion():
    z_amps = np.linspace(0.0, 1.0, 6)
    calibration = zgate_calibrate(z_amps, 3 * z_amps)
    assert zgate_invert(calibration, 0.6) == pytest.approx(0.2, abs=1e-6)
    with pytest.raises(ValueError):
        zgate_invert(calibration, 5.0)


def test_zgate_round_trip_on_cubic_relation():
    z_amps = np.linspace(0.0, 1.0, 11)
    calibrator = ZGateSplineCalibrator().fit(z_amps, 0.5 * z_amps ** 3 + 2.0 * z_amps)
    rng = np.random.default_rng(1)
    for target in rng.uniform(0.0, 2.5, size=100):
        assert calibrator.predict(calibrator.inverse(target)) == pytest.approx(target, abs=1e-6)
    amps = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(calibrator.predict(amps) - (0.5 * amps ** 3 + 2.0 * amps))) < 1e-3


def test_zgate_needs_monotone_branch():
    z_amps = np.linspace(0.0, 2.0, 9)
    with pytest.raises(ValueError, match="not monotone"):
        zgate_invert(zgate_calibrate(z_amps, np.sin(3 * z_amps)), 0.5)
    calibration = zgate_calibrate(z_amps, np.sin(3 * z_amps), branch=(0.0, 0.4))
    assert zgate_invert(calibration, 0.5) == pytest.approx(np.arcsin(0.5) / 3, abs=1e-2)


def test_zgate_knot_validation():
    with pytest.raises(ValueError):
        zgate_calibrate([0.0, 0.5, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        zgate_calibrate([0.0, 0.5, 0.4, 1.0], [0.0, 1.0, 2.0, 3.0])


def test_fringe_knots_recover_relation():
    z_amps = np.linspace(0.0, 1.0, 21)
    relation = lambda z: 0.8 * z ** 2 + 0.3 * z  # noqa: E731
    p_cos, p_sin = zgate_fringe(z_amps, relation, n_segments=5)
    knots_z, knots_phi = extract_fringe_knots(z_amps, p_cos, p_sin, n_segments=5)
    assert np.allclose(knots_z, z_amps)
    assert np.allclose(knots_phi, relation(z_amps), atol=1e-9)


def test_effective_coupling():
    two_pi = 2 * np.pi
    g = effective_coupling(0.0, two_pi * 100, two_pi * 100, two_pi * 4500, two_pi * 4500, two_pi * 5500)
    assert g == pytest.approx(-two_pi * 10)
    assert effective_coupling(1.5, 0.0, 3.0, 1.0, 2.0, 5.0) == 1.5
    assert effective_coupling(0.0, 1.0, 2.0, 3.0, 4.0, 10.0) == pytest.approx(
        effective_coupling(0.0, 2.0, 1.0, 4.0, 3.0, 10.0)
    )
    with pytest.raises(ResonanceError):
        effective_coupling(0.0, 1.0, 1.0, 5.0, 4.0, 5.0)


def test_chevron_recovers_coupling():
    times = np.arange(0.0, 500.0, 2.0)
    population = simulate_chevron(J, times)
    assert population[0] == pytest.approx(1.0)
    assert coupling_from_chevron(times, population) == pytest.approx(J, rel=1e-2)


def test_noisy_chevron_recovers_coupling():
    times = np.arange(0.0, 500.0, 2.0)
    rng = np.random.default_rng(3)
    population = simulate_chevron(J, times) + rng.normal(0.0, 0.05, size=times.size)
    assert coupling_from_chevron(times, population) == pytest.approx(J, rel=3e-2)


def test_detuned_chevron_oscillates_faster():
    times = np.arange(0.0, 500.0, 2.0)
    fit = fit_oscillation_frequency(times, simulate_chevron(J, times, detuning=3 * J))
    assert fit.omega == pytest.approx(np.hypot(4 * J, 3 * J), rel=1e-2)


def test_constant_series_has_no_peak():
    with pytest.raises(NoPeakError):
        fit_oscillation_frequency(np.arange(50.0), np.full(50, 0.7))
