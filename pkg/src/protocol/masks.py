from typing import Optional

import numpy as np

from src.utils.logger import get_logger
from .schema import XMask

logger = get_logger(__name__)


def sample_x_masks(
    n_qubits: int,
    n_sets: int,
    seed: int,
    exclude: Optional[int] = None,
) -> list[XMask]:
    """
    Random initial X-gate sets: every qubit is flipped independently with
    probability 1/2. Deterministic in `seed`; `exclude` pins one qubit
    (typically the center) to no flip.
    """
    if n_sets < 1:
        raise ValueError(f"n_sets must be >= 1, got {n_sets}")
    rng = np.random.default_rng(seed)
    draws = rng.random((n_sets, n_qubits)) < 0.5
    if exclude is not None:
        draws[:, exclude] = False
    logger.debug(f"Sampled {n_sets} X masks for {n_qubits} qubits (seed={seed})")
    return [tuple(bool(flag) for flag in row) for row in draws]
