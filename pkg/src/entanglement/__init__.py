from .component import (
    GME_MAX_QUBITS,
    gme_concurrence_pure,
    partial_trace,
    psd_project,
    purity,
    state_fidelity,
)
from .schema import Bipartition, DensityMatrix, GmeResult, bipartitions
from .tomography import linear_inversion, pauli_expectations, simulate_tomography

__all__ = [
    "GME_MAX_QUBITS", "gme_concurrence_pure", "partial_trace", "psd_project", "purity",
    "state_fidelity",
    "Bipartition", "DensityMatrix", "GmeResult", "bipartitions",
    "linear_inversion", "pauli_expectations", "simulate_tomography",
]
