from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field


class ExactEigen(BaseModel):
    """Exact evolution through the cached spectral decomposition of H."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["exact"] = "exact"


class Trotter2(BaseModel):
    """Symmetric second-order product formula over the edge terms."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["trotter2"] = "trotter2"
    dt: float = Field(default=1.0, gt=0.0, description="Trotter step in ns.")


EvolutionMethod = Annotated[Union[ExactEigen, Trotter2], Field(discriminator="kind")]
