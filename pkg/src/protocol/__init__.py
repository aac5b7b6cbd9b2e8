from .component import (
    butterfly_state,
    clear_caches,
    encoding_angles,
    hamiltonian_for,
    heisenberg_operator,
    local_operator,
    otoc_circuit,
    otoc_profile,
    reference_circuit,
    register_hamiltonian,
    run_otoc,
    run_reference,
    run_sensing,
    run_sensing_abstract,
    run_sensing_hardware,
    scrambled_state,
    sensing_circuit,
    sensing_curve,
)
from .masks import sample_x_masks
from .schema import InsertGate, ProtocolSpec, RunRecord, XMask

__all__ = [
    "butterfly_state", "clear_caches", "encoding_angles", "hamiltonian_for", "heisenberg_operator",
    "local_operator", "otoc_circuit", "otoc_profile", "reference_circuit", "register_hamiltonian", "run_otoc",
    "run_reference", "run_sensing", "run_sensing_abstract", "run_sensing_hardware",
    "scrambled_state", "sensing_circuit", "sensing_curve", "sample_x_masks",
    "InsertGate", "ProtocolSpec", "RunRecord", "XMask",
]
