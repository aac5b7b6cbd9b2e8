"""
Command implementations behind run_experiment.py. Each command runs its
sweeps, reduces over masks, and writes one CSV (or JSON) into the output
directory.
"""
import json
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.calibration.coupling import fit_oscillation_frequency
from src.calibration.distortion import DistortionFitter
from src.calibration.zgate import ZGateSplineCalibrator, extract_fringe_knots
from src.config.schema import ExperimentConfig
from src.engine.graph import graph_distance
from src.entanglement.component import gme_concurrence_pure, state_fidelity
from src.entanglement.tomography import TOMOGRAPHY_MAX_QUBITS, simulate_tomography
from src.metrology.estimators import fisher_information, mask_statistics, slope_at_zero
from src.metrology.schema import PhaseCurve, SensitivityCurve
from src.metrology.theory import bounds, eta_inv_from_otoc
from src.noise.normalization import normalize_otoc, normalize_signal
from src.noise.schema import NoiseModel
from src.protocol.component import butterfly_state
from src.protocol.schema import ProtocolSpec
from src.utils.errors import ReferenceGuardError, SaturationError
from src.utils.logger import get_logger
from .loader import DataLoader, DataLoaderConfig
from .results import ResultTable
from .sweep import SweepContext, build_context, mask_average, run_sweep
from .tracking import RunTracker

logger = get_logger(__name__)

SENSING_REFERENCE_FACTOR = 1.5


def _metadata(config: ExperimentConfig, command: str, **extra) -> dict:
    return {"command": command, "config_hash": config.config_hash(), "seed": config.seed, **extra}


def _write(table: ResultTable, config: ExperimentConfig, name: str, tracker: Optional[RunTracker]) -> Path:
    path = table.to_csv(Path(config.output_dir) / name)
    if tracker is not None:
        tracker.log_artifact(path)
    return path


def _reference_by_time(config: ExperimentConfig, context: SweepContext, factor: float) -> dict[float, float]:
    """Mask-averaged V = I reference per evolution time; exactly 1 without noise."""
    if context.noise is None:
        return {t: 1.0 for t in context.spec.times}
    raw = run_sweep(config, "reference", block_factors=(factor,), context=context)
    averaged = mask_average(raw, ["t_ns"], "ref")
    return dict(zip(averaged["t_ns"], averaged["mean"]))


# --- OTOC ---

def _otoc_frame(config: ExperimentConfig, context: SweepContext) -> pd.DataFrame:
    raw = run_sweep(config, "otoc", context=context)
    frame = mask_average(raw, ["t_ns", "qubit"], "otoc")
    references = _reference_by_time(config, context, 1.0)

    normalized = []
    for t, value in zip(frame["t_ns"], frame["mean"]):
        try:
            normalized.append(float(normalize_otoc([value], references[t])[0]))
        except ReferenceGuardError as e:
            logger.warning(f"t={t} ns: {e}")
            normalized.append(float("nan"))
    frame["norm_mean"] = normalized
    return frame


def cmd_otoc(config: ExperimentConfig, tracker: Optional[RunTracker] = None) -> ResultTable:
    context = build_context(config)
    spec = context.spec
    frame = _otoc_frame(config, context)
    distance = graph_distance(spec.graph, spec.center)
    table = ResultTable(
        {
            "t_ns": frame["t_ns"],
            "qubit": frame["qubit"],
            "distance": [distance[q] for q in frame["qubit"]],
            "otoc_mean": frame["mean"],
            "otoc_std": frame["std"],
            "otoc_norm_mean": frame["norm_mean"],
            "n_masks": frame["count"],
        },
        _metadata(config, "otoc", N=spec.n_qubits),
    )
    _write(table, config, "otoc.csv", tracker)
    return table


# --- Sensing ---

def _sense_raw(config: ExperimentConfig, context: SweepContext) -> ResultTable:
    return run_sweep(config, "sense", context=context)


def cmd_sense(config: ExperimentConfig, tracker: Optional[RunTracker] = None) -> ResultTable:
    context = build_context(config)
    frame = mask_average(_sense_raw(config, context), ["t_ns", "phi"], "sx")
    table = ResultTable(
        {
            "N": [context.spec.n_qubits] * len(frame),
            "t_ns": frame["t_ns"],
            "phi": frame["phi"],
            "sx_mean": frame["mean"],
            "sx_std": frame["std"],
        },
        _metadata(config, "sense", units="t_ns:ns;phi:rad"),
    )
    _write(table, config, "sense.csv", tracker)
    return table


def _normalized_eta(slope: float, sx0: float, reference: float) -> float:
    try:
        sx0_norm = normalize_signal(sx0, reference).value
    except ReferenceGuardError as e:
        logger.warning(f"{e}; dropped from the normalized curve")
        return float("nan")
    if abs(sx0_norm) >= 1.0:
        return float("nan")
    return float(abs(slope / reference) / np.sqrt(1.0 - sx0_norm ** 2))


def sensitivity_frame(config: ExperimentConfig, context: Optional[SweepContext] = None) -> pd.DataFrame:
    """Per-time slope, Fisher information and the three inverted sensitivities."""
    context = context or build_context(config)
    spec: ProtocolSpec = context.spec
    n = spec.n_qubits
    raw = _sense_raw(config, context).frame
    sense_refs = _reference_by_time(config, context, SENSING_REFERENCE_FACTOR)
    otoc = _otoc_frame(config, context)

    rows = []
    for t in spec.times:
        at_t = raw[raw["t_ns"] == t]
        per_mask = at_t.pivot(index="mask", columns="phi", values="sx").sort_index()
        per_mask = per_mask[list(spec.phis)]
        mean_curve = per_mask.to_numpy().mean(axis=0)
        curve = PhaseCurve.from_arrays(spec.phis, mean_curve, n_qubits=n, t=t)
        slope = slope_at_zero(curve)
        sx0 = float(mean_curve[list(spec.phis).index(0.0)])
        try:
            f_zero = fisher_information(curve).f_zero
        except SaturationError as e:
            logger.warning(str(e))
            f_zero = float("nan")
        try:
            eta_inv_std = mask_statistics(spec.phis, per_mask.to_numpy(), n, t).eta_inv_std
        except SaturationError:
            eta_inv_std = float("nan")

        otoc_values = otoc[otoc["t_ns"] == t]["norm_mean"].to_numpy()
        eta_otoc = (
            eta_inv_from_otoc(np.clip(otoc_values, -1.0, 1.0))
            if np.all(np.isfinite(otoc_values)) else float("nan")
        )
        rows.append(
            {
                "N": n,
                "t_ns": t,
                "eta_inv_raw": float(np.sqrt(f_zero)),
                "eta_inv_norm": _normalized_eta(slope.fit, sx0, sense_refs[t]),
                "eta_inv_otoc": eta_otoc,
                "slope": slope.fit,
                "F0": f_zero,
                "slope_fd": slope.finite_difference,
                "slope_agree": slope.agree,
                "sx0": sx0,
                "eta_inv_std": eta_inv_std,
            }
        )
    return pd.DataFrame(rows)


def cmd_sensitivity(config: ExperimentConfig, tracker: Optional[RunTracker] = None) -> ResultTable:
    frame = sensitivity_frame(config)
    curve = SensitivityCurve(
        n_qubits=int(frame["N"].iloc[0]),
        times=tuple(frame["t_ns"]),
        eta_inv=tuple(frame["eta_inv_raw"]),
        eta_inv_norm=tuple(frame["eta_inv_norm"]),
        eta_inv_otoc=tuple(frame["eta_inv_otoc"]),
    )
    t_opt, eta_max = curve.peak()
    logger.info(f"Maximal eta^-1 = {eta_max:.4f} at t = {t_opt} ns (N={curve.n_qubits})")
    if tracker is not None:
        tracker.log_metrics({"eta_inv_max": eta_max, "t_opt_ns": t_opt})
    table = ResultTable.from_frame(frame, _metadata(config, "sensitivity", units="t_ns:ns;F0:rad^-2"))
    _write(table, config, "sensitivity.csv", tracker)
    return table


# --- Entanglement ---

def _gme_at(spec: ProtocolSpec, t: float) -> dict:
    results = [gme_concurrence_pure(butterfly_state(spec, t, mask)) for mask in spec.x_mask_sets]
    values = [r.value for r in results]
    return {
        "t_ns": t,
        "c_gme": float(np.mean(values)),
        "c_gme_std": float(np.std(values)),
        "min_cut": "-".join(str(q) for q in results[0].cut),
        "n_masks": len(values),
    }


def _tomography_rows(config: ExperimentConfig, spec: ProtocolSpec) -> list[dict]:
    rows = []
    for k, t in enumerate(config.tomography.snapshot_times_ns):
        state = butterfly_state(spec, t, spec.x_mask_sets[0])
        seed = int(np.random.SeedSequence(config.seed, spawn_key=(k,)).generate_state(1)[0])
        rho = simulate_tomography(state, config.tomography.shots, seed=seed)
        rows.append(
            {
                "t_ns": t,
                "shots": config.tomography.shots,
                "fidelity": state_fidelity(rho, state),
                "c_gme_true": gme_concurrence_pure(state).value,
            }
        )
    return rows


def cmd_gme(config: ExperimentConfig, tracker: Optional[RunTracker] = None) -> ResultTable:
    """C_GME of the noiseless butterfly state over the time grid (pure-state estimator)."""
    spec = config.protocol_spec()
    if config.noise is not None:
        logger.warning("GME concurrence is evaluated on noiseless pure states; noise settings ignored")
    rows = Parallel(n_jobs=config.workers)(delayed(_gme_at)(spec, t) for t in spec.times)
    table = ResultTable.from_frame(pd.DataFrame(rows), _metadata(config, "gme", N=spec.n_qubits))
    _write(table, config, "gme.csv", tracker)
    if tracker is not None:
        tracker.log_metrics({"c_gme_max": float(table.frame["c_gme"].max())})

    if config.tomography.shots is not None:
        if spec.n_qubits > TOMOGRAPHY_MAX_QUBITS:
            logger.warning(f"Tomography skipped: limited to {TOMOGRAPHY_MAX_QUBITS} qubits")
        else:
            tomography = ResultTable.from_frame(
                pd.DataFrame(_tomography_rows(config, spec)),
                _metadata(config, "gme_tomography", N=spec.n_qubits),
            )
            _write(tomography, config, "gme_tomography.csv", tracker)
    return table


# --- Reference ---

def cmd_reference(config: ExperimentConfig, tracker: Optional[RunTracker] = None) -> ResultTable:
    context = build_context(config)
    raw = run_sweep(config, "reference", block_factors=(1.0, SENSING_REFERENCE_FACTOR), context=context)
    frame = mask_average(raw, ["t_ns", "block_ns"], "ref")
    table = ResultTable(
        {
            "t_ns": frame["t_ns"],
            "block_ns": frame["block_ns"],
            "ref_mean": frame["mean"],
            "ref_std": frame["std"],
            "n_masks": frame["count"],
        },
        _metadata(config, "reference"),
    )
    _write(table, config, "reference.csv", tracker)
    return table


# --- Scaling with N ---

def cmd_scaling(config: ExperimentConfig, tracker: Optional[RunTracker] = None) -> ResultTable:
    """Maximal inverted sensitivity per graph preset against the SQL, HL and N/2 references."""
    if isinstance(config.noise, NoiseModel):
        raise ValueError("Scaling runs need noise unset or 'table1' (explicit models are per graph)")
    rows = []
    for preset in config.scaling_presets:
        payload = config.model_dump(mode="json")
        payload.update(graph={"preset": preset}, center=None)
        preset_config = ExperimentConfig.model_validate(payload)
        frame = sensitivity_frame(preset_config)
        n = int(frame["N"].iloc[0])
        best = int(frame["eta_inv_raw"].fillna(-np.inf).idxmax())
        limits = bounds(n)
        rows.append(
            {
                "N": n,
                "t_opt_ns": frame.loc[best, "t_ns"],
                "eta_inv_max": frame.loc[best, "eta_inv_raw"],
                "eta_inv_norm_max": float(np.nanmax(frame["eta_inv_norm"])) if frame["eta_inv_norm"].notna().any() else float("nan"),
                "eta_inv_otoc_max": float(np.nanmax(frame["eta_inv_otoc"])),
                "eta_inv_sql": limits.sql,
                "eta_inv_hl": limits.hl,
                "eta_inv_target": limits.target,
                "slope_at_opt": frame.loc[best, "slope"],
            }
        )
        logger.info(f"{preset}: max eta^-1 = {rows[-1]['eta_inv_max']:.4f} (SQL {limits.sql:.4f})")
    table = ResultTable.from_frame(pd.DataFrame(rows), _metadata(config, "scaling"))
    _write(table, config, "scaling.csv", tracker)
    return table


# --- Calibration ---

_CALIBRATION_COLUMNS = {
    "distortion": ["t_d_ns", "delta_phi_rad"],
    "zgate": ["z_amp"],
    "coupling": ["t_ns", "population"],
}


def cmd_calibrate(
    config: ExperimentConfig,
    kind: str,
    input_path: str,
    output_path: Optional[str] = None,
    tracker: Optional[RunTracker] = None,
) -> dict:
    """Fits one calibration model to measured samples and writes it as JSON."""
    if kind not in _CALIBRATION_COLUMNS:
        raise ValueError(f"Unknown calibration '{kind}'; choose from {sorted(_CALIBRATION_COLUMNS)}")
    data = DataLoader(
        DataLoaderConfig(type="csv", path=input_path, required_columns=_CALIBRATION_COLUMNS[kind])
    ).load_data()
    settings = config.calibration

    if kind == "distortion":
        fitter = DistortionFitter(settings.distortion, z0_d=settings.z0_d, t_p_ns=settings.t_p_ns)
        sigma = data["sigma_rad"].to_numpy() if "sigma_rad" in data.columns else None
        fitter.fit(data["t_d_ns"].to_numpy(), data["delta_phi_rad"].to_numpy(), sigma=sigma)
        result = {**fitter.model_.model_dump(), "relative_rms": fitter.relative_rms_}
    elif kind == "zgate":
        if "phi_rad" in data.columns:
            z_amps, phis = data["z_amp"].to_numpy(), data["phi_rad"].to_numpy()
        elif {"p_cos", "p_sin"} <= set(data.columns):
            z_amps, phis = extract_fringe_knots(
                data["z_amp"], data["p_cos"], data["p_sin"], n_segments=settings.zgate_segments
            )
        else:
            raise ValueError("Z-gate data needs a phi_rad column or fringe columns p_cos and p_sin")
        calibrator = ZGateSplineCalibrator(branch=settings.zgate_branch).fit(z_amps, phis)
        result = calibrator.calibration_.model_dump()
    else:
        fit = fit_oscillation_frequency(data["t_ns"].to_numpy(), data["population"].to_numpy())
        result = {
            **fit.model_dump(),
            "j_rad_per_ns": fit.coupling,
            "j_mhz": fit.coupling / (2 * np.pi) * 1000.0,
        }

    path = Path(output_path) if output_path else Path(config.output_dir) / f"calibration_{kind}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        json.dump(result, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {kind} calibration to {path}")
    if tracker is not None:
        tracker.log_artifact(path)
    return result


def cmd_schema(output_path: Optional[str] = None) -> dict:
    """JSON schema of the experiment configuration."""
    schema = ExperimentConfig.model_json_schema()
    if output_path:
        with open(output_path, "w", newline="\n") as f:
            json.dump(schema, f, indent=2, sort_keys=True)
            f.write("\n")
    return schema
