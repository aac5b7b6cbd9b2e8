"""
Optional MLflow tracking of one command run: the config as a dict, scalar
summaries as metrics, and every written file as an artifact.
"""
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Mapping

import mlflow
import numpy as np

from src.config.schema import ExperimentConfig
from src.utils.logger import get_logger

logger = get_logger(__name__)


class RunTracker:
    """Thin wrapper that turns every call into a no-op when tracking is disabled."""
    def __init__(self, enabled: bool):
        self.enabled = enabled

    def log_metrics(self, metrics: Mapping[str, float]) -> None:
        finite = {k: float(v) for k, v in metrics.items() if v is not None and np.isfinite(v)}
        if self.enabled and finite:
            mlflow.log_metrics(finite)

    def log_artifact(self, path: str | Path) -> None:
        if self.enabled:
            mlflow.log_artifact(str(path))


@contextmanager
def tracked_run(config: ExperimentConfig, command: str) -> Iterator[RunTracker]:
    if not config.tracking.enabled:
        yield RunTracker(enabled=False)
        return

    mlflow.set_tracking_uri(config.tracking.tracking_uri)
    mlflow.set_experiment(config.tracking.experiment_name)
    with mlflow.start_run(run_name=f"{command}_{config.config_hash()[:8]}") as run:
        logger.info(f"Started MLflow run: {run.info.run_id} ({command})")
        mlflow.log_dict(config.model_dump(mode="json"), "config.json")
        mlflow.set_tags({"command": command, "seed": str(config.seed)})
        yield RunTracker(enabled=True)
