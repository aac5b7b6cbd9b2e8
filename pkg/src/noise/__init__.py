"""
Open-system simulation: trajectories, density-matrix oracle, readout errors
and reference-based normalization.
"""
from .channels import (
    amplitude_damping_kraus,
    damping_probability,
    dephasing_probability,
    noise_schedule,
)
from .density import DENSITY_MAX_QUBITS, density_expectation, fidelity_to_pure, run_noisy_density
from .normalization import REFERENCE_GUARD, normalize_otoc, normalize_signal
from .readout import apply_readout_error, readout_correct, readout_expectation, readout_matrix
from .schema import NoiseModel, NoisyEstimate, NormalizedSignal, TrajectoryConfig
from .trajectories import run_noisy_observables, run_noisy_trajectories, trajectory_rng

__all__ = [
    "amplitude_damping_kraus", "damping_probability", "dephasing_probability", "noise_schedule",
    "DENSITY_MAX_QUBITS", "density_expectation", "fidelity_to_pure", "run_noisy_density",
    "REFERENCE_GUARD", "normalize_otoc", "normalize_signal",
    "apply_readout_error", "readout_correct", "readout_expectation", "readout_matrix",
    "NoiseModel", "NoisyEstimate", "NormalizedSignal", "TrajectoryConfig",
    "run_noisy_observables", "run_noisy_trajectories", "trajectory_rng",
]
