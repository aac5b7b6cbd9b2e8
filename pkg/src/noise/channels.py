"""
Channel parameters and the slice schedule shared by the trajectory and
density-matrix simulators.

Hamiltonian evolution is cut into equal slices of at most `slice_ns`; every
gate layer occupies a `gate_ns` window (gates applied at its start, then
idle slices). Every qubit decoheres after every slice.
"""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.engine.circuit import Circuit, Evolution, GateLayer, PhaseEncoding
from .schema import NoiseModel

_NS_PER_US = 1000.0


def damping_probability(dt_ns: float, t1_us: float) -> float:
    """gamma = 1 - exp(-dt / T1)."""
    if t1_us <= 0:
        raise ValueError(f"T1 must be positive, got {t1_us}")
    return float(-math.expm1(-dt_ns / (t1_us * _NS_PER_US)))


def dephasing_probability(dt_ns: float, t1_us: float, t2_us: float) -> float:
    """p = (1 - exp(-dt / T_phi)) / 2 with 1/T_phi = 1/T2 - 1/(2 T1)."""
    if t2_us > 2 * t1_us:
        raise ValueError(f"T2 = {t2_us} us exceeds 2*T1 = {2 * t1_us} us")
    rate = 1.0 / (t2_us * _NS_PER_US) - 1.0 / (2.0 * t1_us * _NS_PER_US)
    rate = max(rate, 0.0)
    return float(-0.5 * math.expm1(-dt_ns * rate))


def amplitude_damping_kraus(gamma: float) -> tuple[np.ndarray, np.ndarray]:
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=np.complex128)
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return k0, k1


@dataclass(frozen=True)
class Decay:
    """Decoherence of every qubit over `duration_ns`."""
    duration_ns: float


@dataclass(frozen=True)
class EvolveSlice:
    t: float


ScheduledStep = Union[GateLayer, PhaseEncoding, EvolveSlice, Decay]


def _split(duration: float, slice_ns: float) -> int:
    return max(1, math.ceil(abs(duration) / slice_ns - 1e-9))


def noise_schedule(circuit: Circuit, noise: NoiseModel) -> list[ScheduledStep]:
    steps: list[ScheduledStep] = []
    for operation in circuit.operations:
        if isinstance(operation, Evolution):
            if operation.t == 0:
                continue
            n_slices = _split(operation.t, noise.slice_ns)
            for _ in range(n_slices):
                steps.append(EvolveSlice(operation.t / n_slices))
                steps.append(Decay(abs(operation.t) / n_slices))
        elif isinstance(operation, (GateLayer, PhaseEncoding)):
            steps.append(operation)
            if noise.gate_ns > 0:
                n_slices = _split(noise.gate_ns, noise.slice_ns)
                steps.extend(Decay(noise.gate_ns / n_slices) for _ in range(n_slices))
        else:
            raise TypeError(f"Unsupported circuit operation: {operation!r}")
    return steps


def decay_parameters(noise: NoiseModel, duration_ns: float) -> tuple[np.ndarray, np.ndarray]:
    """(gamma, p) per qubit for one decay step."""
    gamma = np.array([damping_probability(duration_ns, t1) for t1 in noise.t1_us])
    dephase = np.array(
        [dephasing_probability(duration_ns, t1, t2) for t1, t2 in zip(noise.t1_us, noise.t2_us)]
    )
    return gamma, dephase
