from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.engine.state import StateVector


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace operator on n qubits (little-endian basis order)."""
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        dim = 2 ** self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"Expected a {dim}x{dim} matrix, got shape {self.matrix.shape}")
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=1e-9):
            raise ValueError("Density matrix is not Hermitian within 1e-9")
        if abs(np.trace(self.matrix) - 1.0) > 1e-9:
            raise ValueError(f"Density matrix trace is {np.trace(self.matrix).real:.12f}, not 1")

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return cls(state.n_qubits, np.outer(state.amplitudes, state.amplitudes.conj()))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def expectation_diagonal(self, diagonal: np.ndarray) -> float:
        """Tr(rho D) for a diagonal operator D."""
        return float(np.real(np.diagonal(self.matrix) @ diagonal))


class Bipartition(BaseModel):
    """Cut A | complement(A) with A in canonical form (contains qubit 0)."""
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(..., ge=2)
    subset: tuple[int, ...]

    @model_validator(mode="after")
    def _validate_subset(self) -> "Bipartition":
        if not 1 <= len(self.subset) <= self.n_qubits - 1:
            raise ValueError(f"Bipartition side must have 1..{self.n_qubits - 1} qubits")
        if len(set(self.subset)) != len(self.subset):
            raise ValueError("Bipartition subset has repeated qubits")
        if any(not 0 <= q < self.n_qubits for q in self.subset):
            raise ValueError(f"Bipartition subset {self.subset} out of range")
        return self

    @property
    def complement(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n_qubits) if q not in self.subset)


def bipartitions(n_qubits: int) -> Iterator[Bipartition]:
    """The 2**(N-1) - 1 distinct cuts, each listed once by the side holding qubit 0."""
    rest = range(1, n_qubits)
    for size in range(0, n_qubits - 1):
        for others in combinations(rest, size):
            yield Bipartition(n_qubits=n_qubits, subset=(0,) + others)


class GmeResult(BaseModel):
    value: float = Field(..., ge=0.0)
    cut: tuple[int, ...]
    min_purity: float
