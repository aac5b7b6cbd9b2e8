from typing import Protocol

import pandas as pd

from src.utils.logger import get_logger
from .schema import DataLoaderConfig

logger = get_logger(__name__)


# Interface for loader functions
class LoaderStrategy(Protocol):
    def __call__(self, path: str) -> pd.DataFrame:
        ...


# --- Concrete Strategies ---
def _load_from_csv(path: str) -> pd.DataFrame:
    """Loads a CSV file, skipping '#' metadata lines."""
    logger.info(f"Loading data from CSV at {path}")
    try:
        return pd.read_csv(path, comment="#")
    except FileNotFoundError:
        logger.error(f"File not found at path: {path}")
        raise


class DataLoader:
    """Loads calibration sample tables using a strategy pattern."""
    _STRATEGIES: dict[str, LoaderStrategy] = {
        "csv": _load_from_csv,
    }

    def __init__(self, config: DataLoaderConfig):
        self.config = config

    def load_data(self) -> pd.DataFrame:
        """
        Loads data by dispatching to the correct strategy based on config.

        Returns:
            pd.DataFrame: The loaded data.
        Raises:
            ValueError: If the source type is unsupported or required columns are missing.
        """
        strategy = self._STRATEGIES.get(self.config.type)
        if strategy is None:
            error_msg = (
                f"Unsupported data source type: {self.config.type}.\n"
                f"Supported types are: {list(self._STRATEGIES.keys())}"
            )
            logger.error(error_msg)
            raise ValueError(error_msg)

        data = strategy(str(self.config.path))
        missing = [c for c in self.config.required_columns if c not in data.columns]
        if missing:
            raise ValueError(f"{self.config.path} is missing columns {missing}; found {list(data.columns)}")
        return data
