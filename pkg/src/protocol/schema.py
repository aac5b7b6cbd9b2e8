"""
Data contracts of the butterfly protocol: the experiment description and
the per-point result record.
"""
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.engine.graph import QubitGraph
from src.engine.schema import EvolutionMethod, ExactEigen

XMask = tuple[bool, ...]
InsertGate = Literal["x", "rx_plus", "rx_minus", "identity"]


class ProtocolSpec(BaseModel):
    """Full description of a butterfly experiment on one coupling graph."""
    model_config = ConfigDict(frozen=True)

    graph: QubitGraph
    j: float = Field(..., description="Coupling strength in rad/ns.")
    insert_gate: Optional[InsertGate] = Field(
        default=None,
        description="Explicit center-qubit insert; None uses L_V = (I + lv_sign * iX)/sqrt(2).",
    )
    lv_sign: Literal[1, -1] = Field(
        default=1, description="+1 gives L_V = (I + iX)/sqrt(2), a negative slope at phi = 0."
    )
    times: tuple[float, ...] = Field(default=(0.0,), description="Evolution times in ns.")
    phis: tuple[float, ...] = Field(default=(0.0,), description="Encoded phases in radians.")
    x_mask_sets: tuple[XMask, ...] = Field(default=())
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    mode: Literal["abstract", "hardware"] = "abstract"
    evolution: EvolutionMethod = Field(default_factory=ExactEigen)

    @model_validator(mode="after")
    def _validate_grids(self) -> "ProtocolSpec":
        if any(t < 0 for t in self.times):
            raise ValueError("Evolution times must be non-negative")
        for index, mask in enumerate(self.x_mask_sets):
            if len(mask) != self.graph.n_qubits:
                raise ValueError(
                    f"X mask {index} has length {len(mask)}, expected {self.graph.n_qubits}"
                )
        return self

    @property
    def n_qubits(self) -> int:
        return self.graph.n_qubits

    @property
    def center(self) -> int:
        return self.graph.center


class RunRecord(BaseModel):
    """One evaluated grid point."""
    t: float
    phi: float
    mask_index: int
    value: float = Field(..., ge=-1.0 - 1e-9, le=1.0 + 1e-9)
    observable: str
