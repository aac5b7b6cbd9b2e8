"""
Reference-based correction of decohered signals: a measured value is
divided by the same circuit run with the insert replaced by the identity.
Sensing points use the reference at single-block duration 1.5 t, OTOC
points the reference at block duration t.
"""
import numpy as np

from src.utils.errors import ReferenceGuardError
from src.utils.logger import get_logger
from .schema import NormalizedSignal

logger = get_logger(__name__)

REFERENCE_GUARD = 0.05
REPORT_CLIP = 1.2


def normalize_signal(
    value: float,
    reference: float,
    guard: float = REFERENCE_GUARD,
    clip: float = REPORT_CLIP,
) -> NormalizedSignal:
    """
    value / reference.

    Raises:
        ReferenceGuardError: If |reference| <= guard (over-decohered point).
    """
    if abs(reference) <= guard:
        raise ReferenceGuardError(
            f"Reference signal {reference:.4f} is below the {guard} guard; point is over-decohered"
        )
    ratio = value / reference
    if abs(ratio) > clip:
        logger.warning(f"Normalized signal {ratio:.3f} exceeds {clip}; clipping the report")
        return NormalizedSignal(value=float(np.sign(ratio) * clip), clipped=True)
    return NormalizedSignal(value=float(ratio))


def normalize_otoc(otoc_values, reference: float, guard: float = REFERENCE_GUARD) -> np.ndarray:
    """O_j,norm(t) = O_j(t) / O_ref(t); the guard applies as for sensing points."""
    if abs(reference) <= guard:
        raise ReferenceGuardError(
            f"OTOC reference {reference:.4f} is below the {guard} guard"
        )
    return np.asarray(otoc_values, dtype=np.float64) / reference
