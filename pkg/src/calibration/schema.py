"""
Data contracts for the calibration toolkit: fitted models and fitter settings.
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Four-term flux-distortion model measured on the device (amplitudes as fractions).
REFERENCE_AMPLITUDES = (-0.0085, -0.0199, -0.0146, -0.0356)
REFERENCE_TAUS_NS = (1400.0, 460.0, 65.5, 14.4)


class DistortionModel(BaseModel):
    """
    z_dist(t) = z0 * sum_i a_i exp(-t / tau_i), seen by a Ramsey measurement as the
    phase error accumulated at delay t_d after a flux pulse of length t_p.
    """
    model_config = ConfigDict(frozen=True)

    amplitudes: tuple[float, ...] = Field(..., description="a_i as fractions (-0.85% -> -0.0085).")
    taus_ns: tuple[float, ...] = Field(..., description="Time constants tau_i in ns.")
    z0_d: float = Field(default=1.0, description="Pulse amplitude times D(z_p), rad/ns.")
    t_p_ns: float = Field(default=100.0, gt=0, description="Flux pulse length in ns.")

    @model_validator(mode="after")
    def _validate_terms(self) -> "DistortionModel":
        if len(self.amplitudes) != len(self.taus_ns) or not self.amplitudes:
            raise ValueError("Need n_terms >= 1 amplitudes and time constants of equal count")
        if any(tau <= 0 for tau in self.taus_ns):
            raise ValueError("Time constants must be positive")
        return self

    @property
    def n_terms(self) -> int:
        return len(self.taus_ns)

    def canonical(self) -> "DistortionModel":
        """Terms sorted by decreasing time constant."""
        order = np.argsort(self.taus_ns)[::-1]
        return self.model_copy(
            update={
                "amplitudes": tuple(float(self.amplitudes[i]) for i in order),
                "taus_ns": tuple(float(self.taus_ns[i]) for i in order),
            }
        )

    @classmethod
    def reference(cls, **overrides) -> "DistortionModel":
        return cls(amplitudes=REFERENCE_AMPLITUDES, taus_ns=REFERENCE_TAUS_NS, **overrides)


class DistortionFitConfig(BaseModel):
    n_terms: int = Field(default=4, ge=1)
    tau_min_ns: float = Field(default=1.0, gt=0)
    tau_max_ns: float = Field(default=1e4, gt=0)
    n_tau_inits: int = Field(default=10, ge=1, description="Log-spaced tau initializations per term pool.")
    max_nfev: int = Field(default=4000, ge=1)
    n_jobs: int = Field(default=1, description="Parallel starts; -1 uses every core.")


class SplineCalibration(BaseModel):
    """Knots of the phase-amplitude relation phi = f(Z_amp)."""
    model_config = ConfigDict(frozen=True)

    z_amps: tuple[float, ...]
    phis: tuple[float, ...]
    branch: Optional[tuple[float, float]] = Field(
        default=None, description="Monotone amplitude range used for inversion; full knot range if unset."
    )

    @model_validator(mode="after")
    def _validate_knots(self) -> "SplineCalibration":
        if len(self.z_amps) != len(self.phis):
            raise ValueError("Need one phase per amplitude knot")
        if len(self.z_amps) < 4:
            raise ValueError(f"Spline calibration needs at least 4 knots, got {len(self.z_amps)}")
        if np.any(np.diff(self.z_amps) <= 0):
            raise ValueError("Amplitude knots must be strictly increasing")
        if self.branch is not None:
            lo, hi = self.branch
            if not (self.z_amps[0] <= lo < hi <= self.z_amps[-1]):
                raise ValueError(f"Branch {self.branch} is not inside the knot range")
        return self


class OscillationFit(BaseModel):
    omega: float = Field(..., description="Angular frequency in rad per time unit of the input.")
    amplitude: float
    offset: float
    phase: float

    @property
    def coupling(self) -> float:
        """J of an exchange pair, whose population oscillates at 4J."""
        return self.omega / 4.0
