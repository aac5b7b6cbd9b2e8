import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Per-qubit device parameters Q0..Q9: readout fidelities, T1 and T2 (us).
TABLE1_F_GG = (0.959, 0.954, 0.943, 0.949, 0.938, 0.959, 0.964, 0.959, 0.953, 0.954)
TABLE1_F_EE = (0.939, 0.931, 0.904, 0.914, 0.915, 0.910, 0.887, 0.917, 0.913, 0.886)
TABLE1_T1_US = (33.9, 24.5, 47.9, 37.7, 31.1, 45.2, 29.7, 39.4, 57.3, 31.1)
TABLE1_T2_US = (12.2, 8.8, 4.5, 6.1, 4.6, 4.8, 4.0, 11.0, 3.7, 5.8)


class NoiseModel(BaseModel):
    """Amplitude damping and dephasing per qubit plus readout assignment errors."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    t1_us: tuple[float, ...] = Field(..., description="Energy relaxation times (us).")
    t2_us: tuple[float, ...] = Field(..., description="Ramsey dephasing times (us).")
    f_gg: tuple[float, ...] = Field(..., description="P(read 0 | prepared 0).")
    f_ee: tuple[float, ...] = Field(..., description="P(read 1 | prepared 1).")
    slice_ns: float = Field(default=4.0, gt=0, description="Width of one decoherence slice.")
    gate_ns: float = Field(default=20.0, ge=0, description="Duration of a single-qubit gate layer.")
    readout: bool = Field(default=True, description="Apply assignment errors at the final measurement.")

    @model_validator(mode="after")
    def _validate_parameters(self) -> "NoiseModel":
        n = len(self.t1_us)
        if not (len(self.t2_us) == len(self.f_gg) == len(self.f_ee) == n):
            raise ValueError("t1_us, t2_us, f_gg and f_ee must have one entry per qubit")
        for q, (t1, t2) in enumerate(zip(self.t1_us, self.t2_us)):
            if t1 <= 0 or t2 <= 0:
                raise ValueError(f"Qubit {q}: T1 and T2 must be positive")
            if t2 > 2 * t1:
                raise ValueError(f"Qubit {q}: T2 = {t2} us exceeds 2*T1 = {2 * t1} us")
        for q, (f_gg, f_ee) in enumerate(zip(self.f_gg, self.f_ee)):
            if not (0.5 < f_gg <= 1.0 and 0.5 < f_ee <= 1.0):
                raise ValueError(f"Qubit {q}: readout fidelities must lie in (0.5, 1]")
        return self

    @property
    def n_qubits(self) -> int:
        return len(self.t1_us)

    @classmethod
    def table1(cls, n_qubits: int, **overrides) -> "NoiseModel":
        """Device preset; qubit k takes the parameters of Q_k."""
        if not 1 <= n_qubits <= len(TABLE1_T1_US):
            raise ValueError(f"The table1 preset covers 1..{len(TABLE1_T1_US)} qubits, got {n_qubits}")
        return cls(
            t1_us=TABLE1_T1_US[:n_qubits],
            t2_us=TABLE1_T2_US[:n_qubits],
            f_gg=TABLE1_F_GG[:n_qubits],
            f_ee=TABLE1_F_EE[:n_qubits],
            **overrides,
        )

    @classmethod
    def noiseless(cls, n_qubits: int, **overrides) -> "NoiseModel":
        return cls(
            t1_us=(math.inf,) * n_qubits,
            t2_us=(math.inf,) * n_qubits,
            f_gg=(1.0,) * n_qubits,
            f_ee=(1.0,) * n_qubits,
            **overrides,
        )


class TrajectoryConfig(BaseModel):
    n_trajectories: int = Field(default=2000, ge=1)
    seed: int = Field(default=0, ge=0)
    point_index: int = Field(default=0, ge=0, description="Grid point, part of every trajectory's RNG key.")


class NoisyEstimate(BaseModel):
    mean: float
    stderr: float = Field(..., ge=0.0)
    n_trajectories: int


class NormalizedSignal(BaseModel):
    value: float
    clipped: bool = False
