from typing import Literal

from pydantic import BaseModel, Field, FilePath


class DataLoaderConfig(BaseModel):
    """
    Configuration schema for the measurement-data loader.

    Attributes:
        type: The type of the data source. 'csv' files may carry '#' metadata lines.
        path: The path to the data file.
        required_columns: Columns the loaded table must contain.
    """
    type: Literal["csv"] = "csv"
    path: FilePath
    required_columns: list[str] = Field(default_factory=list)
