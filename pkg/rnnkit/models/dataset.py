"""Where a labeled dataset comes from and how it is normalized."""
from pathlib import Path
from typing import Literal, Optional, Tuple, Union

from pydantic import model_validator

from rnnkit.models.config import Settings


class DatasetSource(Settings):
    """
    A CSV file or an IDX image/label pair.

    ``label_column`` is a header name or a column index (negative indices
    count from the end) and only applies to CSV input; None reads an
    unlabeled table. IDX input without a label file is unlabeled too.
    """

    format: Literal["csv", "idx"] = "csv"
    paths: Tuple[Path, ...]
    label_column: Optional[Union[int, str]] = -1
    normalization: Literal["minmax", "none"] = "minmax"

    @model_validator(mode="after")
    def _path_count(self):
        allowed = (1,) if self.format == "csv" else (1, 2)
        if len(self.paths) not in allowed:
            raise ValueError(f"{self.format} input takes {allowed} path(s), got {len(self.paths)}")
        return self
