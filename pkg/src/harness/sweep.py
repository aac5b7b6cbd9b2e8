"""
Shared sweep executor. Grid points are independent pure functions of the
protocol description; they are dispatched with joblib and collected in
canonical (t, mask) order, so worker count never changes the output.
"""
from dataclasses import asdict, dataclass
from typing import Literal, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.config.schema import ExperimentConfig
from src.engine.circuit import Circuit, Observable
from src.engine.hamiltonian import Hamiltonian
from src.noise.density import density_expectation, run_noisy_density
from src.noise.schema import NoiseModel, TrajectoryConfig
from src.noise.trajectories import run_noisy_observables
from src.protocol.component import (
    hamiltonian_for,
    otoc_circuit,
    otoc_profile,
    reference_circuit,
    register_hamiltonian,
    run_reference,
    sensing_circuit,
    sensing_curve,
)
from src.protocol.schema import ProtocolSpec, RunRecord
from src.utils.errors import SweepPointError
from src.utils.logger import get_logger
from .results import ResultTable

logger = get_logger(__name__)

SweepKind = Literal["sense", "otoc", "reference"]


@dataclass(frozen=True)
class SweepContext:
    spec: ProtocolSpec
    hamiltonian: Optional[Hamiltonian] = None
    noise: Optional[NoiseModel] = None
    noise_engine: str = "trajectories"
    n_trajectories: int = 2000


@dataclass(frozen=True)
class SweepPoint:
    index: int
    kind: SweepKind
    t: float
    mask_index: int
    block_factor: float = 1.0


def sweep_points(
    spec: ProtocolSpec, kind: SweepKind, block_factors: Sequence[float] = (1.0,)
) -> list[SweepPoint]:
    """Canonical order: time, then block factor (reference only), then mask."""
    factors = block_factors if kind == "reference" else (1.0,)
    points = []
    for t in spec.times:
        for factor in factors:
            for mask_index in range(len(spec.x_mask_sets)):
                points.append(SweepPoint(len(points), kind, t, mask_index, factor))
    return points


def _noisy(
    context: SweepContext, circuit: Circuit, observables: Sequence[Observable], point_index: int
) -> list[tuple[float, float]]:
    """(mean, stderr) per observable under the configured noise engine."""
    spec = context.spec
    hamiltonian = hamiltonian_for(spec.graph, spec.j)
    if context.noise_engine == "density":
        rho = run_noisy_density(circuit, hamiltonian, context.noise, spec.evolution)
        return [(density_expectation(rho, observable, context.noise), 0.0) for observable in observables]
    config = TrajectoryConfig(
        n_trajectories=context.n_trajectories, seed=spec.seed, point_index=point_index
    )
    estimates = run_noisy_observables(circuit, hamiltonian, context.noise, config, observables, spec.evolution)
    return [(e.mean, e.stderr) for e in estimates]


def _sense_row(point: SweepPoint, phi: float, value: float, stderr: float) -> dict:
    """One sensing row, range-checked through RunRecord."""
    record = RunRecord(t=point.t, phi=phi, mask_index=point.mask_index, value=value, observable="sigma_x")
    return {"t_ns": record.t, "mask": record.mask_index, "phi": record.phi, "sx": record.value, "sx_stderr": stderr}


def evaluate_point(context: SweepContext, point: SweepPoint) -> list[dict]:
    """Rows produced by one grid point."""
    spec = context.spec
    mask = spec.x_mask_sets[point.mask_index]
    base = {"t_ns": point.t, "mask": point.mask_index}

    if point.kind == "sense":
        if context.noise is None:
            values = sensing_curve(spec, point.t, spec.phis, mask)
            return [_sense_row(point, phi, float(v), 0.0) for phi, v in zip(spec.phis, values)]
        rows = []
        for k, phi in enumerate(spec.phis):
            circuit = sensing_circuit(spec, point.t, phi, mask)
            (mean, stderr), = _noisy(context, circuit, [circuit.observable], point.index * len(spec.phis) + k)
            rows.append(_sense_row(point, phi, mean, stderr))
        return rows

    if point.kind == "otoc":
        if context.noise is None:
            values = otoc_profile(spec, point.t, mask)
            return [
                {**base, "qubit": q, "otoc": float(v), "otoc_stderr": 0.0} for q, v in enumerate(values)
            ]
        circuit = otoc_circuit(spec, point.t, spec.center, mask)
        observables = [Observable("z", q) for q in range(spec.n_qubits)]
        estimates = _noisy(context, circuit, observables, point.index)
        return [
            {**base, "qubit": q, "otoc": mean, "otoc_stderr": stderr}
            for q, (mean, stderr) in enumerate(estimates)
        ]

    if point.kind == "reference":
        block = {**base, "block_ns": point.block_factor * point.t}
        if context.noise is None:
            value = run_reference(spec, point.t, mask, block_factor=point.block_factor)
            return [{**block, "ref": value, "ref_stderr": 0.0}]
        circuit = reference_circuit(spec, point.t, mask, block_factor=point.block_factor)
        (mean, stderr), = _noisy(context, circuit, [circuit.observable], point.index)
        return [{**block, "ref": mean, "ref_stderr": stderr}]

    raise ValueError(f"Unknown sweep kind '{point.kind}'")


def _evaluate_safely(context: SweepContext, point: SweepPoint) -> list[dict]:
    if context.hamiltonian is not None:
        register_hamiltonian(context.hamiltonian)
    try:
        return evaluate_point(context, point)
    except Exception as e:
        raise SweepPointError(point.index, asdict(point), e) from e


def build_context(config: ExperimentConfig, spec: Optional[ProtocolSpec] = None) -> SweepContext:
    spec = spec or config.protocol_spec()
    return SweepContext(
        spec=spec,
        hamiltonian=hamiltonian_for(spec.graph, spec.j),
        noise=config.noise_model(),
        noise_engine=config.noise_engine,
        n_trajectories=config.n_trajectories,
    )


def run_sweep(
    config: ExperimentConfig,
    kind: SweepKind,
    block_factors: Sequence[float] = (1.0,),
    context: Optional[SweepContext] = None,
) -> ResultTable:
    """
    Evaluates every grid point of one kind and returns the raw per-mask rows.

    Raises:
        SweepPointError: If a point fails; carries its index and coordinates.
    """
    context = context or build_context(config)
    points = sweep_points(context.spec, kind, block_factors)
    logger.info(
        f"Sweep '{kind}': {len(points)} points ({len(context.spec.times)} times x "
        f"{len(context.spec.x_mask_sets)} masks), N={context.spec.n_qubits}, "
        f"noise={'off' if context.noise is None else context.noise_engine}, workers={config.workers}"
    )
    results = Parallel(n_jobs=config.workers)(delayed(_evaluate_safely)(context, point) for point in points)
    rows = [row for point_rows in results for row in point_rows]
    columns = {key: [row[key] for row in rows] for key in rows[0]} if rows else {}
    logger.info(f"Sweep '{kind}' finished: {len(rows)} rows")
    return ResultTable(
        columns,
        metadata={"config_hash": config.config_hash(), "seed": config.seed, "sweep": kind},
    )


def mask_average(table: ResultTable, keys: Sequence[str], value: str) -> pd.DataFrame:
    """Mean and population std over masks, grouped by `keys` in first-appearance order."""
    grouped = table.frame.groupby(list(keys), sort=False)[value]
    return grouped.agg(["mean", lambda s: float(np.std(s)), "count"]).set_axis(
        ["mean", "std", "count"], axis=1
    ).reset_index()
