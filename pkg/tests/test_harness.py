import json
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from src.calibration import DistortionModel, distortion_phase, simulate_chevron
from src.config.schema import ExperimentConfig, PhaseRange
from src.harness import (
    ResultTable,
    build_context,
    cmd_calibrate,
    cmd_gme,
    cmd_otoc,
    cmd_reference,
    cmd_scaling,
    cmd_schema,
    cmd_sense,
    cmd_sensitivity,
    mask_average,
    run_sweep,
    sensitivity_frame,
    sweep_points,
    tracked_run,
)
from src.utils.errors import SweepPointError


@pytest.fixture
def small_config(tmp_path):
    """Noiseless 3-qubit chain on a short grid."""
    return ExperimentConfig(
        graph="chain3",
        times=[0.0, 20.0, 40.0],
        phis=PhaseRange(count=41),
        n_mask_sets=3,
        seed=7,
        output_dir=str(tmp_path),
    )


def test_result_table_validation_and_header(tmp_path):
    with pytest.raises(ValueError):
        ResultTable({"a": [1, 2], "b": [1]})
    table = ResultTable({"t_ns": [0.0, 8.0], "value": [0.1, 1 / 3]}, {"seed": 4, "command": "test"})
    path = table.to_csv(tmp_path / "nested" / "table.csv")
    text = path.read_text()
    assert text.splitlines()[:3] == ["# command=test", "# seed=4", "# version=0.1.0"]
    assert "\r" not in text
    loaded = ResultTable.read_csv(path)
    assert loaded.metadata["seed"] == "4"
    assert loaded.columns == ["t_ns", "value"]
    assert loaded.frame["value"].iloc[1] == pytest.approx(1 / 3, rel=1e-9)


def test_sweep_points_order(small_config):
    spec = small_config.protocol_spec()
    points = sweep_points(spec, "reference", block_factors=(1.0, 1.5))
    assert len(points) == 3 * 2 * 3
    assert [p.index for p in points] == list(range(len(points)))
    assert (points[0].t, points[0].block_factor, points[0].mask_index) == (0.0, 1.0, 0)
    assert (points[3].t, points[3].block_factor, points[3].mask_index) == (0.0, 1.5, 0)
    assert len(sweep_points(spec, "sense", block_factors=(1.0, 1.5))) == 9


def test_mask_average_uses_population_std():
    table = ResultTable({"t_ns": [0.0, 0.0, 8.0, 8.0], "mask": [0, 1, 0, 1], "v": [1.0, 3.0, 2.0, 2.0]})
    frame = mask_average(table, ["t_ns"], "v")
    assert list(frame["mean"]) == [2.0, 2.0]
    assert list(frame["std"]) == [1.0, 0.0]
    assert list(frame["count"]) == [2, 2]


def test_sense_at_time_zero_is_negative_sine(small_config):
    table = cmd_sense(small_config)
    frame = table.frame[table.frame["t_ns"] == 0.0]
    assert np.allclose(frame["sx_mean"], -np.sin(frame["phi"]), atol=1e-9)
    assert np.allclose(frame["sx_std"], 0.0, atol=1e-12)
    assert (table.frame["N"] == 3).all()


def test_outputs_are_byte_identical(small_config, tmp_path):
    first = cmd_sense(small_config)
    first_bytes = (tmp_path / "sense.csv").read_bytes()
    second_dir = tmp_path / "again"
    cmd_sense(small_config.model_copy(update={"output_dir": str(second_dir)}))
    assert (second_dir / "sense.csv").read_bytes() == first_bytes
    assert len(first) == 3 * 41


def test_worker_count_does_not_change_results(small_config, tmp_path):
    cmd_otoc(small_config)
    parallel_dir = tmp_path / "parallel"
    cmd_otoc(small_config.model_copy(update={"output_dir": str(parallel_dir), "workers": 2}))
    assert (parallel_dir / "otoc.csv").read_bytes() == (tmp_path / "otoc.csv").read_bytes()


def test_hardware_mode_matches_abstract(small_config, tmp_path):
    abstract = cmd_sense(small_config).frame
    hardware = cmd_sense(
        small_config.model_copy(update={"mode": "hardware", "output_dir": str(tmp_path / "hw")})
    ).frame
    assert np.allclose(abstract["sx_mean"], hardware["sx_mean"], atol=1e-8)


def test_otoc_at_time_zero(small_config):
    frame = cmd_otoc(small_config).frame
    start = frame[frame["t_ns"] == 0.0].set_index("qubit")
    assert start.loc[1, "otoc_mean"] == pytest.approx(-1.0)
    assert start.loc[0, "otoc_mean"] == pytest.approx(1.0)
    assert start.loc[2, "otoc_mean"] == pytest.approx(1.0)
    assert list(start["distance"]) == [1, 0, 1]
    assert np.allclose(frame["otoc_norm_mean"], frame["otoc_mean"])


def test_light_cone_onset_grows_with_distance(tmp_path):
    config = ExperimentConfig(
        graph="chain5", times={"start": 0, "stop": 200, "step": 4}, n_mask_sets=4, seed=2,
        output_dir=str(tmp_path),
    )
    frame = cmd_otoc(config).frame
    onset = {}
    for distance, group in frame.groupby("distance"):
        decayed = group[group["otoc_mean"] < 0.9]
        onset[distance] = decayed["t_ns"].min() if len(decayed) else np.inf
    ordered = [onset[d] for d in sorted(onset)]
    assert ordered[0] == 0.0
    assert ordered == sorted(ordered)


def test_sensitivity_columns_and_time_zero(small_config, tmp_path):
    table = cmd_sensitivity(small_config)
    frame = table.frame.set_index("t_ns")
    assert frame.loc[0.0, "eta_inv_otoc"] == pytest.approx(1.0)
    assert frame.loc[0.0, "eta_inv_raw"] == pytest.approx(1.0, abs=1e-3)
    assert frame.loc[0.0, "slope"] == pytest.approx(-1.0, abs=1e-3)
    assert np.allclose(frame["eta_inv_norm"], np.abs(frame["slope"]), atol=1e-9)
    assert (tmp_path / "sensitivity.csv").exists()
    assert "slope_agree" in table.columns


def test_noisy_sensitivity_is_below_noiseless(tmp_path):
    base = dict(graph="chain3", times=[0.0, 40.0], phis=PhaseRange(count=21), n_mask_sets=2, seed=3)
    noiseless = cmd_sensitivity(ExperimentConfig(**base, output_dir=str(tmp_path / "clean"))).frame
    noisy = cmd_sensitivity(
        ExperimentConfig(**base, noise="table1", noise_engine="density", output_dir=str(tmp_path / "noisy"))
    ).frame
    assert np.all(noisy["eta_inv_raw"].to_numpy() < noiseless["eta_inv_raw"].to_numpy())


def test_normalized_sensitivity_recovers_noiseless_curve(tmp_path):
    base = dict(graph="chain3", times=[24.0, 48.0], phis=PhaseRange(count=41), n_mask_sets=3, seed=9)
    noiseless = sensitivity_frame(ExperimentConfig(**base, output_dir=str(tmp_path / "clean")))
    noisy = sensitivity_frame(
        ExperimentConfig(
            **base, noise="table1", noise_engine="trajectories", n_trajectories=2000,
            output_dir=str(tmp_path / "noisy"),
        )
    )
    clean = noiseless["eta_inv_raw"].to_numpy()
    normalized = noisy["eta_inv_norm"].to_numpy()
    assert np.all(np.isfinite(normalized))
    assert np.allclose(normalized, clean, rtol=0.15)


def test_noisy_trajectory_sweep_runs(tmp_path):
    config = ExperimentConfig(
        graph="chain3", times=[0.0, 24.0], n_mask_sets=2, seed=1, noise="table1",
        n_trajectories=50, output_dir=str(tmp_path),
    )
    table = cmd_reference(config)
    assert len(table) == 4
    assert (table.frame["ref_mean"] < 1.0).all()


def test_reference_without_noise_is_one(small_config):
    frame = cmd_reference(small_config).frame
    assert np.allclose(frame["ref_mean"], 1.0, atol=1e-10)
    assert list(frame["block_ns"]) == [0.0, 0.0, 20.0, 30.0, 40.0, 60.0]


def test_gme_outputs(tmp_path):
    config = ExperimentConfig(
        graph="chain3", times=[0.0, 40.0, 80.0], n_mask_sets=2, seed=5, insert_gate="rx_plus",
        tomography={"shots": 2000, "snapshot_times_ns": [0.0, 40.0]}, output_dir=str(tmp_path),
    )
    frame = cmd_gme(config).frame
    assert frame.loc[0, "c_gme"] == pytest.approx(0.0, abs=1e-7)
    assert (frame["c_gme"] >= 0).all()
    tomography = pd.read_csv(tmp_path / "gme_tomography.csv", comment="#")
    assert (tomography["fidelity"] >= 0.9).all()


def test_scaling_rows(tmp_path):
    config = ExperimentConfig(
        scaling_presets=["chain3", "chain4"], times=[0.0, 40.0, 80.0], n_mask_sets=2, seed=1,
        output_dir=str(tmp_path),
    )
    frame = cmd_scaling(config).frame
    assert list(frame["N"]) == [3, 4]
    assert frame.loc[1, "eta_inv_sql"] == pytest.approx(2.0)
    assert frame.loc[1, "eta_inv_target"] == pytest.approx(2.0)


@pytest.mark.slow
def test_six_qubit_sensitivity_reaches_half_n(tmp_path):
    config = ExperimentConfig(graph="n6", seed=20240601, output_dir=str(tmp_path))
    frame = cmd_sensitivity(config).frame
    assert 2.55 <= frame["eta_inv_raw"].max() <= 3.15


@pytest.mark.slow
def test_six_qubit_butterfly_state_is_entangled(tmp_path):
    config = ExperimentConfig(graph="n6", seed=20240601, insert_gate="rx_plus", output_dir=str(tmp_path))
    frame = cmd_gme(config).frame
    assert frame["c_gme"].max() > 0.5
    # entanglement builds up: the mask-averaged curve peaks strictly inside the window
    t_peak = frame["t_ns"].iloc[int(frame["c_gme"].to_numpy().argmax())]
    assert frame["t_ns"].min() < t_peak < frame["t_ns"].max()


@pytest.mark.slow
def test_larger_patches_beat_standard_quantum_limit(tmp_path):
    config = ExperimentConfig(scaling_presets=["n8", "n10"], seed=20240601, output_dir=str(tmp_path))
    frame = cmd_scaling(config).frame
    assert (frame["eta_inv_max"] > frame["eta_inv_sql"]).all()
    half_n = frame["N"].to_numpy() / 2
    ratio = frame["eta_inv_max"].to_numpy() / half_n
    assert np.all((ratio >= 0.85) & (ratio <= 1.05)), ratio


@patch("src.harness.sweep.evaluate_point")
def test_failing_point_is_reported(mock_evaluate, small_config):
    mock_evaluate.side_effect = ValueError("bad point")
    with pytest.raises(SweepPointError) as excinfo:
        run_sweep(small_config, "sense", context=build_context(small_config))
    assert excinfo.value.point_index == 0
    assert isinstance(excinfo.value.cause, ValueError)


def test_calibrate_distortion(small_config, tmp_path):
    t_d = np.logspace(0, 3, 40)
    model = DistortionModel(amplitudes=(-0.02,), taus_ns=(50.0,))
    pd.DataFrame({"t_d_ns": t_d, "delta_phi_rad": distortion_phase(t_d, model)}).to_csv(
        tmp_path / "distortion.csv", index=False
    )
    config = small_config.model_copy(
        update={"calibration": small_config.calibration.model_copy(
            update={"distortion": small_config.calibration.distortion.model_copy(update={"n_terms": 1})}
        )}
    )
    result = cmd_calibrate(config, "distortion", str(tmp_path / "distortion.csv"))
    assert result["taus_ns"][0] == pytest.approx(50.0, rel=1e-6)
    saved = json.loads((tmp_path / "calibration_distortion.json").read_text())
    assert saved["amplitudes"][0] == pytest.approx(-0.02, rel=1e-6)


def test_calibrate_zgate_and_coupling(small_config, tmp_path):
    z_amps = np.linspace(0.0, 1.0, 6)
    pd.DataFrame({"z_amp": z_amps, "phi_rad": 3 * z_amps}).to_csv(tmp_path / "zgate.csv", index=False)
    result = cmd_calibrate(small_config, "zgate", str(tmp_path / "zgate.csv"))
    assert len(result["z_amps"]) == 6

    j = 2 * np.pi * 3e-3
    times = np.arange(0.0, 500.0, 2.0)
    pd.DataFrame({"t_ns": times, "population": simulate_chevron(j, times)}).to_csv(
        tmp_path / "chevron.csv", index=False
    )
    result = cmd_calibrate(small_config, "coupling", str(tmp_path / "chevron.csv"), str(tmp_path / "j.json"))
    assert result["j_mhz"] == pytest.approx(3.0, rel=1e-2)
    assert (tmp_path / "j.json").exists()


def test_calibrate_rejects_missing_columns(small_config, tmp_path):
    pd.DataFrame({"t_ns": [0.0, 1.0]}).to_csv(tmp_path / "bad.csv", index=False)
    with pytest.raises(ValueError):
        cmd_calibrate(small_config, "coupling", str(tmp_path / "bad.csv"))
    with pytest.raises(ValueError):
        cmd_calibrate(small_config, "unknown", str(tmp_path / "bad.csv"))


def test_schema_command(tmp_path):
    schema = cmd_schema(str(tmp_path / "schema.json"))
    assert "graph" in schema["properties"]
    assert json.loads((tmp_path / "schema.json").read_text()) == schema


@patch("src.harness.tracking.mlflow")
def test_tracked_run_logs_config(mock_mlflow, small_config):
    config = small_config.model_copy(
        update={"tracking": small_config.tracking.model_copy(update={"enabled": True})}
    )
    with tracked_run(config, "sense") as tracker:
        tracker.log_metrics({"eta_inv_max": 1.5, "skipped": float("nan")})
        tracker.log_artifact("sense.csv")
    mock_mlflow.set_experiment.assert_called_once_with("butterfly-metrology")
    mock_mlflow.log_dict.assert_called_once()
    mock_mlflow.log_metrics.assert_called_once_with({"eta_inv_max": 1.5})
    mock_mlflow.log_artifact.assert_called_once_with("sense.csv")


@patch("src.harness.tracking.mlflow")
def test_tracking_disabled_is_silent(mock_mlflow, small_config):
    with tracked_run(small_config, "sense") as tracker:
        tracker.log_metrics({"eta_inv_max": 1.5})
    mock_mlflow.start_run.assert_not_called()
    mock_mlflow.log_metrics.assert_not_called()


@patch("src.harness.sweep.sensing_curve")
def test_out_of_range_sensing_value_is_rejected(mock_curve, small_config):
    mock_curve.return_value = np.full(len(small_config.protocol_spec().phis), 1.5)
    with pytest.raises(SweepPointError) as excinfo:
        run_sweep(small_config, "sense", context=build_context(small_config))
    assert isinstance(excinfo.value.cause, ValueError)
