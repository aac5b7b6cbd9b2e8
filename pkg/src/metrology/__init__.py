from .estimators import (
    SATURATION_TOL,
    fisher_information,
    inverted_sensitivity,
    local_derivative,
    mask_statistics,
    slope_at_zero,
)
from .schema import (
    Bounds,
    FisherResult,
    MaskStatistics,
    PhaseCurve,
    PolarizationDist,
    SensitivityCurve,
    SlopeEstimate,
)
from .theory import (
    bounds,
    decomposition_check,
    decomposition_terms,
    eta_inv_from_otoc,
    expected_v_from_distribution,
    polarization_distribution,
)

__all__ = [
    "SATURATION_TOL", "fisher_information", "inverted_sensitivity", "local_derivative",
    "mask_statistics", "slope_at_zero",
    "Bounds", "FisherResult", "MaskStatistics", "PhaseCurve", "PolarizationDist",
    "SensitivityCurve", "SlopeEstimate",
    "bounds", "decomposition_check", "decomposition_terms", "eta_inv_from_otoc",
    "expected_v_from_distribution", "polarization_distribution",
]
