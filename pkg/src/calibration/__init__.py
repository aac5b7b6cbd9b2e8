from .coupling import coupling_from_chevron, effective_coupling, fit_oscillation_frequency, simulate_chevron
from .distortion import DistortionFitter, distortion_phase, distortion_samples, fit_distortion
from .schema import (
    DistortionFitConfig,
    DistortionModel,
    OscillationFit,
    SplineCalibration,
)
from .zgate import ZGateSplineCalibrator, extract_fringe_knots, zgate_calibrate, zgate_fringe, zgate_invert

__all__ = [
    "coupling_from_chevron", "effective_coupling", "fit_oscillation_frequency", "simulate_chevron",
    "DistortionFitter", "distortion_phase", "distortion_samples", "fit_distortion",
    "DistortionFitConfig", "DistortionModel", "OscillationFit", "SplineCalibration",
    "ZGateSplineCalibrator", "extract_fringe_knots", "zgate_calibrate", "zgate_fringe", "zgate_invert",
]
