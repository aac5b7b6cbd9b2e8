"""
Validated records exchanged between the protocol sweeps, the metrology
estimators and the result writers.
"""
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

_VALUE_TOL = 1e-9


def _finite_or_nan(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


class PhaseCurve(BaseModel):
    """<sigma_x> as a function of the encoded phase for one (N, t)."""
    model_config = ConfigDict(frozen=True)

    phis: tuple[float, ...]
    values: tuple[float, ...]
    n_qubits: int = Field(..., ge=1)
    t: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _validate_grid(self) -> "PhaseCurve":
        phis = np.asarray(self.phis)
        if len(self.values) != phis.size:
            raise ValueError(f"{len(self.values)} values for {phis.size} phases")
        if phis.size < 2 or np.any(np.diff(phis) <= 0):
            raise ValueError("Phase grid must be strictly increasing")
        if not np.allclose(phis, -phis[::-1], atol=1e-9):
            raise ValueError("Phase grid must be symmetric about 0")
        if not np.allclose(np.diff(phis), phis[1] - phis[0], rtol=1e-6, atol=1e-12):
            raise ValueError("Phase grid must be uniform")
        values = np.asarray(self.values)
        if np.any(np.abs(values[np.isfinite(values)]) > 1.0 + _VALUE_TOL):
            raise ValueError("Expectation values must lie in [-1, 1]")
        return self

    @property
    def phi_array(self) -> np.ndarray:
        return np.asarray(self.phis, dtype=np.float64)

    @property
    def value_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @property
    def step(self) -> float:
        return float(self.phis[1] - self.phis[0])

    @classmethod
    def from_arrays(cls, phis, values, n_qubits: int, t: float = 0.0) -> "PhaseCurve":
        return cls(
            phis=tuple(float(p) for p in phis),
            values=tuple(float(v) for v in values),
            n_qubits=n_qubits,
            t=t,
        )


class SlopeEstimate(BaseModel):
    """Slope of <sigma_x> at phi = 0 from two estimators."""
    fit: float
    finite_difference: float
    window: float
    degree: int
    agree: bool

    @property
    def value(self) -> float:
        return self.fit


class FisherResult(BaseModel):
    """Pointwise Fisher information; saturated points are NaN."""
    phis: tuple[float, ...]
    values: tuple[float, ...]
    f_zero: float = Field(..., ge=0.0, description="From the local derivative at phi = 0.")
    f_zero_fit: float = Field(..., ge=0.0, description="From the odd-polynomial slope at phi = 0.")
    f_max: float = Field(..., ge=0.0)
    n_saturated: int = Field(default=0, ge=0)


class SensitivityCurve(BaseModel):
    """Inverted sensitivity versus evolution time, as parallel arrays."""
    n_qubits: int = Field(..., ge=1)
    times: tuple[float, ...]
    eta_inv: tuple[float, ...]
    eta_inv_norm: Optional[tuple[float, ...]] = None
    eta_inv_otoc: Optional[tuple[float, ...]] = None

    @model_validator(mode="after")
    def _validate_arrays(self) -> "SensitivityCurve":
        for name in ("eta_inv", "eta_inv_norm", "eta_inv_otoc"):
            values = getattr(self, name)
            if values is None:
                continue
            if len(values) != len(self.times):
                raise ValueError(f"{name} has {len(values)} entries for {len(self.times)} times")
            if any(v < 0 for v in values if not math.isnan(v)):
                raise ValueError(f"{name} must be non-negative")
        return self

    def peak(self) -> tuple[float, float]:
        """(t_opt, max eta_inv)."""
        values = _finite_or_nan(self.eta_inv)
        index = int(np.nanargmax(values))
        return self.times[index], float(values[index])


class PolarizationDist(BaseModel):
    """P(S_z) over S_z = -N/2, ..., +N/2 (ascending)."""
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(..., ge=1)
    probabilities: tuple[float, ...]

    @model_validator(mode="after")
    def _validate_distribution(self) -> "PolarizationDist":
        if len(self.probabilities) != self.n_qubits + 1:
            raise ValueError(
                f"Expected {self.n_qubits + 1} probabilities, got {len(self.probabilities)}"
            )
        if any(p < -1e-12 for p in self.probabilities):
            raise ValueError("Probabilities must be non-negative")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValueError(f"Probabilities sum to {sum(self.probabilities)}, not 1")
        return self

    @property
    def sz_values(self) -> np.ndarray:
        return np.arange(self.n_qubits + 1) - self.n_qubits / 2.0

    def probability(self, sz: float) -> float:
        index = int(round(sz + self.n_qubits / 2.0))
        if not 0 <= index <= self.n_qubits:
            return 0.0
        return self.probabilities[index]

    def mean(self) -> float:
        return float(np.dot(self.sz_values, self.probabilities))


class Bounds(BaseModel):
    sql: float
    hl: float
    target: float


class MaskStatistics(BaseModel):
    """Per-mask slopes and inverted sensitivities with their spread."""
    slopes: tuple[float, ...]
    eta_inv: tuple[float, ...]
    slope_mean: float
    slope_std: float
    eta_inv_mean: float
    eta_inv_std: float
