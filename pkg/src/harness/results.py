"""
Tabular command outputs. A ResultTable is written as CSV preceded by
'# key=value' metadata lines; identical inputs give identical bytes.
"""
from pathlib import Path
from typing import Any, Mapping

import pandas as pd

from src import __version__
from src.utils.logger import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.10g"


class ResultTable:
    """Named columns of equal length plus a metadata header."""
    def __init__(self, columns: Mapping[str, Any], metadata: Mapping[str, Any] | None = None):
        lengths = {name: len(values) for name, values in columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"Column lengths differ: {lengths}")
        self.frame = pd.DataFrame({name: list(values) for name, values in columns.items()})
        self.metadata = {"version": __version__, **dict(metadata or {})}

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, metadata: Mapping[str, Any] | None = None) -> "ResultTable":
        return cls({column: frame[column].tolist() for column in frame.columns}, metadata)

    @property
    def columns(self) -> list[str]:
        return list(self.frame.columns)

    def __len__(self) -> int:
        return len(self.frame)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = "".join(f"# {key}={self.metadata[key]}\n" for key in sorted(self.metadata))
        body = self.frame.to_csv(index=False, lineterminator="\n", float_format=FLOAT_FORMAT)
        with open(path, "w", newline="\n") as f:
            f.write(header + body)
        logger.info(f"Wrote {len(self.frame)} rows to {path}")
        return path

    @classmethod
    def read_csv(cls, path: str | Path) -> "ResultTable":
        metadata = {}
        with open(path, "r") as f:
            for line in f:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition("=")
                metadata[key] = value
        return cls.from_frame(pd.read_csv(path, comment="#"), metadata)
