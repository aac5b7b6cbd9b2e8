from .component import DataLoader
from .schema import DataLoaderConfig

__all__ = ["DataLoader", "DataLoaderConfig"]
