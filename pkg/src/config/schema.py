"""
Root experiment configuration.

A config file is YAML (JSON is accepted, being valid YAML). Loading runs
three stages: yaml.safe_load, recursive ${VAR:-default} resolution from the
environment, pydantic validation. Validation errors are reported with the
YAML line of each offending key.
"""
import hashlib
import json
import os
import re
from typing import Any, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.calibration.schema import DistortionFitConfig
from src.engine.graph import QubitGraph, preset_graph
from src.engine.schema import EvolutionMethod, ExactEigen
from src.noise.density import DENSITY_MAX_QUBITS
from src.noise.schema import NoiseModel
from src.protocol.masks import sample_x_masks
from src.protocol.schema import InsertGate, ProtocolSpec
from src.utils.errors import ConfigError

_STRICT = ConfigDict(extra="forbid")


class GraphConfig(BaseModel):
    """Either a named preset or an explicit qubit count and edge list."""
    model_config = _STRICT

    preset: Optional[str] = Field(default=None, description="n6, n8, n10, chain<N> or grid<R>x<C>.")
    n_qubits: Optional[int] = Field(default=None, ge=1)
    edges: Optional[list[tuple[int, int]]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "GraphConfig":
        explicit = self.n_qubits is not None or self.edges is not None
        if (self.preset is None) == (not explicit):
            raise ValueError("Give either a graph preset or n_qubits with edges")
        if explicit and (self.n_qubits is None or self.edges is None):
            raise ValueError("An explicit graph needs both n_qubits and edges")
        return self

    def build(self, center: Optional[int] = None) -> QubitGraph:
        if self.preset is not None:
            graph = preset_graph(self.preset)
            if center is not None and center != graph.center:
                graph = QubitGraph.from_edges(
                    graph.n_qubits, graph.edges, center=center, positions=graph.positions, name=graph.name
                )
            return graph
        return QubitGraph.from_edges(self.n_qubits, self.edges, center=center)


class TimeRange(BaseModel):
    model_config = _STRICT

    start: float = Field(default=0.0, ge=0)
    stop: float = Field(default=160.0, ge=0)
    step: float = Field(default=8.0, gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "TimeRange":
        if self.stop < self.start:
            raise ValueError("Time range stop must not precede start")
        return self

    def values(self) -> tuple[float, ...]:
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return tuple(float(self.start + k * self.step) for k in range(count))


class PhaseRange(BaseModel):
    """`count` uniform points on [-limit, limit]."""
    model_config = _STRICT

    count: int = Field(default=41, ge=5)
    limit: float = Field(default=float(np.pi), gt=0)

    @field_validator("count")
    @classmethod
    def _odd(cls, count: int) -> int:
        if count % 2 == 0:
            raise ValueError("Phase count must be odd so the grid contains phi = 0")
        return count

    def values(self) -> tuple[float, ...]:
        grid = np.linspace(-self.limit, self.limit, self.count)
        grid[self.count // 2] = 0.0
        return tuple(float(p) for p in grid)


class TrackingConfig(BaseModel):
    """Optional MLflow tracking of a command run."""
    model_config = _STRICT

    enabled: bool = False
    tracking_uri: str = Field(default_factory=lambda: os.environ.get("MLFLOW_TRACKING_URI", "file:///tmp/mlruns"))
    experiment_name: str = "butterfly-metrology"


class TomographyConfig(BaseModel):
    model_config = _STRICT

    shots: Optional[int] = Field(default=None, ge=1, description="Shots per setting; unset disables tomography.")
    snapshot_times_ns: list[float] = Field(default_factory=lambda: [0.0, 32.0, 56.0, 80.0])


class CalibrationConfig(BaseModel):
    model_config = _STRICT

    distortion: DistortionFitConfig = Field(default_factory=DistortionFitConfig)
    z0_d: float = 1.0
    t_p_ns: float = Field(default=100.0, gt=0)
    zgate_segments: int = Field(default=5, ge=1)
    zgate_branch: Optional[tuple[float, float]] = None


class ExperimentConfig(BaseModel):
    """The root configuration of every command."""
    model_config = _STRICT

    graph: GraphConfig = Field(default_factory=lambda: GraphConfig(preset="n6"))
    center: Optional[int] = Field(default=None, ge=0, description="Overrides the graph center.")
    j_mhz: float = Field(default=3.0, gt=0, description="Coupling J/2pi in MHz.")
    times: Union[TimeRange, list[float]] = Field(default_factory=TimeRange, description="Evolution times in ns.")
    phis: Union[PhaseRange, list[float]] = Field(default_factory=PhaseRange, description="Encoded phases in rad.")
    n_mask_sets: int = Field(default=10, ge=1)
    exclude_center_from_masks: bool = False
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    mode: Literal["abstract", "hardware"] = "abstract"
    insert_gate: Optional[InsertGate] = None
    lv_sign: Literal[1, -1] = 1
    evolution: EvolutionMethod = Field(default_factory=ExactEigen)
    noise: Union[None, Literal["table1"], NoiseModel] = None
    noise_engine: Literal["trajectories", "density"] = "trajectories"
    n_trajectories: int = Field(default=2000, ge=1)
    output_dir: str = Field(default_factory=lambda: os.environ.get("BUTTERFLY_OUT_DIR", "results"))
    workers: int = Field(default=1, description="joblib n_jobs; -1 uses every core.")
    scaling_presets: list[str] = Field(default_factory=lambda: ["n6", "n8", "n10"])
    tomography: TomographyConfig = Field(default_factory=TomographyConfig)
    tracking: TrackingConfig = Field(default_factory=TrackingConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)

    @field_validator("graph", mode="before")
    @classmethod
    def _preset_shorthand(cls, value: Any) -> Any:
        return {"preset": value} if isinstance(value, str) else value

    @field_validator("times", "phis")
    @classmethod
    def _non_empty(cls, value):
        if isinstance(value, list) and not value:
            raise ValueError("Grid must not be empty")
        return value

    @field_validator("times")
    @classmethod
    def _non_negative_times(cls, value):
        if isinstance(value, list) and any(t < 0 for t in value):
            raise ValueError("Evolution times must be non-negative")
        return value

    @model_validator(mode="after")
    def _validate_against_graph(self) -> "ExperimentConfig":
        graph = self.build_graph()
        if isinstance(self.noise, NoiseModel) and self.noise.n_qubits != graph.n_qubits:
            raise ValueError(
                f"Noise model covers {self.noise.n_qubits} qubits, graph has {graph.n_qubits}"
            )
        if self.noise is not None and self.noise_engine == "density" and graph.n_qubits > DENSITY_MAX_QUBITS:
            raise ValueError(f"noise_engine 'density' supports at most {DENSITY_MAX_QUBITS} qubits")
        return self

    # --- derived quantities ---

    def build_graph(self) -> QubitGraph:
        return self.graph.build(center=self.center)

    @property
    def j_rad_per_ns(self) -> float:
        """2 pi J with J in GHz."""
        return 2.0 * np.pi * self.j_mhz / 1000.0

    def time_grid(self) -> tuple[float, ...]:
        return tuple(self.times) if isinstance(self.times, list) else self.times.values()

    def phase_grid(self) -> tuple[float, ...]:
        return tuple(self.phis) if isinstance(self.phis, list) else self.phis.values()

    def noise_model(self) -> Optional[NoiseModel]:
        if self.noise == "table1":
            return NoiseModel.table1(self.build_graph().n_qubits)
        return self.noise

    def protocol_spec(self) -> ProtocolSpec:
        graph = self.build_graph()
        masks = sample_x_masks(
            graph.n_qubits,
            self.n_mask_sets,
            self.seed,
            exclude=graph.center if self.exclude_center_from_masks else None,
        )
        return ProtocolSpec(
            graph=graph,
            j=self.j_rad_per_ns,
            insert_gate=self.insert_gate,
            lv_sign=self.lv_sign,
            times=self.time_grid(),
            phis=self.phase_grid(),
            x_mask_sets=tuple(masks),
            seed=self.seed,
            mode=self.mode,
            evolution=self.evolution,
        )

    def config_hash(self) -> str:
        """SHA256 of the canonical JSON form (run-location fields excluded)."""
        payload = self.model_dump(mode="json", exclude={"output_dir", "workers", "tracking"})
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    # --- loading ---

    @classmethod
    def from_yaml(cls, path: str) -> "ExperimentConfig":
        """
        Loads, resolves environment variables, and validates a configuration file.

        Raises:
            ConfigError: On YAML syntax errors or validation failures, naming
                the offending keys and their lines.
        """
        with open(path, "r") as f:
            text = f.read()
        try:
            config_dict = yaml.safe_load(text) or {}
            root = yaml.compose(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse {path}: {e}") from e
        if not isinstance(config_dict, dict):
            raise ConfigError(f"{path}: top level must be a mapping")

        resolved = cls._resolve_env_vars(config_dict)
        try:
            return cls(**resolved)
        except ValidationError as e:
            raise ConfigError(_describe_errors(path, e, root)) from e

    @staticmethod
    def _resolve_env_vars(obj: Any) -> Any:
        """
        Recursively replaces ${VAR_NAME:-default_value} placeholders with the
        environment value, or the default when the variable is unset.
        """
        pattern = re.compile(r'\$\{(\w+)(?::-([^}]+))?\}')

        def resolve_string(value: str) -> str:
            def replacer(match: re.Match) -> str:
                var_name, default = match.groups()
                return os.environ.get(var_name, default or '')
            return pattern.sub(replacer, value)

        if isinstance(obj, dict):
            return {k: ExperimentConfig._resolve_env_vars(v) for k, v in obj.items()}
        elif isinstance(obj, list):
            return [ExperimentConfig._resolve_env_vars(item) for item in obj]
        elif isinstance(obj, str):
            return resolve_string(obj)
        else:
            return obj


def _node_line(root: Optional[yaml.Node], loc: tuple) -> Optional[int]:
    """1-based line of the deepest YAML node reachable along a pydantic error location."""
    node, line = root, None
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            match = next(((k, v) for k, v in node.value if k.value == str(part)), None)
            if match is None:
                break
            line = match[0].start_mark.line + 1
            node = match[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
            line = node.start_mark.line + 1
        else:
            continue
    return line


def _describe_errors(path: str, error: ValidationError, root: Optional[yaml.Node]) -> str:
    lines = [f"Invalid configuration {path}:"]
    for item in error.errors():
        loc = tuple(item["loc"])
        where = ".".join(str(p) for p in loc) or "<root>"
        line = _node_line(root, loc)
        prefix = f"line {line}: " if line is not None else ""
        lines.append(f"  {prefix}{where}: {item['msg']}")
    return "\n".join(lines)


def load_config(path: str) -> ExperimentConfig:
    return ExperimentConfig.from_yaml(path)
