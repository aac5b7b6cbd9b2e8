"""
Experiment orchestration: seeded sweeps, mask averaging, result tables and commands.
"""
from .commands import (
    cmd_calibrate,
    cmd_gme,
    cmd_otoc,
    cmd_reference,
    cmd_scaling,
    cmd_schema,
    cmd_sense,
    cmd_sensitivity,
    sensitivity_frame,
)
from .results import ResultTable
from .sweep import SweepContext, SweepPoint, build_context, evaluate_point, mask_average, run_sweep, sweep_points
from .tracking import RunTracker, tracked_run

__all__ = [
    "cmd_calibrate", "cmd_gme", "cmd_otoc", "cmd_reference", "cmd_scaling", "cmd_schema",
    "cmd_sense", "cmd_sensitivity", "sensitivity_frame",
    "ResultTable",
    "SweepContext", "SweepPoint", "build_context", "evaluate_point", "mask_average", "run_sweep",
    "sweep_points",
    "RunTracker", "tracked_run",
]
