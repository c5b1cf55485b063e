"""Data loading utilities for CSV tables and IDX image/label pairs."""
import csv
import gzip
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from rnnkit.exceptions import DataFormatError
from rnnkit.models.dataset import DatasetSource
from rnnkit.models.mlrnn import LabeledDataset, NormalizationStats, one_hot

logger = logging.getLogger(__name__)

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class RawTable:
    """Attributes and targets exactly as read, before normalization."""

    X: np.ndarray
    Y: np.ndarray
    class_names: Tuple[str, ...]

    def __len__(self) -> int:
        return self.X.shape[0]

    def to_dataset(self, rows: Optional[np.ndarray] = None, stats: Optional[NormalizationStats] = None) -> LabeledDataset:
        """Select rows and apply normalization statistics if given."""
        X = self.X if rows is None else self.X[rows]
        Y = self.Y if rows is None else self.Y[rows]
        if stats is not None:
            X = stats.apply(X)
        return LabeledDataset(X, Y, self.class_names)


def parse_float(value: Optional[str], source: str, line: int, column: str) -> float:
    """Parse one CSV cell, reporting the cell position on failure."""
    if value is None:
        raise DataFormatError(f"missing value in column {column!r}", source, line=line)
    try:
        result = float(value)
    except ValueError:
        raise DataFormatError(f"non-numeric value {value!r} in column {column!r}", source, line=line) from None
    if not np.isfinite(result):
        raise DataFormatError(f"non-finite value {value!r} in column {column!r}", source, line=line)
    return result


def _resolve_label(fieldnames: Sequence[str], label_column: Union[int, str], source: str) -> str:
    if isinstance(label_column, str) and label_column.lstrip("-").isdigit():
        label_column = int(label_column)
    if isinstance(label_column, int):
        if not -len(fieldnames) <= label_column < len(fieldnames):
            raise DataFormatError(f"label column index {label_column} out of range", source, line=1)
        return fieldnames[label_column]
    if label_column not in fieldnames:
        raise DataFormatError(f"label column {label_column!r} not in header", source, line=1)
    return label_column


def read_csv(csv_path: Path, label_column: Optional[Union[int, str]] = -1) -> RawTable:
    """
    Read a CSV table with a header row.

    Every column but the label column must be numeric. Classes are one-hot
    encoded in order of first appearance. With ``label_column=None`` every
    column is an attribute and the targets are empty.
    """
    source = str(csv_path)
    rows: List[List[float]] = []
    labels: List[int] = []
    class_names: List[str] = []

    try:
        f = open(csv_path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot open: {exc.strerror}", source) from None
    with f:
        reader = csv.DictReader(f)
        fieldnames = reader.fieldnames
        if not fieldnames or any(not name.strip() for name in fieldnames):
            raise DataFormatError("missing or malformed header row", source, line=1)
        if len(set(fieldnames)) != len(fieldnames):
            raise DataFormatError("duplicate column names in header", source, line=1)
        label_name = None if label_column is None else _resolve_label(fieldnames, label_column, source)
        attributes = [name for name in fieldnames if name != label_name]

        for row in reader:
            line = reader.line_num
            if None in row:
                raise DataFormatError(
                    f"expected {len(fieldnames)} fields, got {len(fieldnames) + len(row[None])}", source, line=line
                )
            if label_name is not None:
                label = row[label_name]
                if label is None:
                    raise DataFormatError("row is shorter than the header", source, line=line)
                label = label.strip()
                if label not in class_names:
                    class_names.append(label)
                labels.append(class_names.index(label))
            rows.append([parse_float(row[name], source, line, name) for name in attributes])

    if not rows:
        raise DataFormatError("no data rows", source)
    logger.info("read %d rows, %d attributes, %d classes from %s", len(rows), len(attributes), len(class_names), source)
    return RawTable(
        X=np.array(rows, dtype=float).reshape(len(rows), len(attributes)),
        Y=one_hot(labels, len(class_names)),
        class_names=tuple(class_names),
    )


def write_csv(csv_path: Path, X: np.ndarray, labels: Sequence[str], attribute_names: Optional[Sequence[str]] = None) -> None:
    """Write attributes at full precision with a trailing ``label`` column."""
    X = np.asarray(X, dtype=float)
    names = list(attribute_names or (f"x{i}" for i in range(X.shape[1])))
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([*names, "label"])
        for values, label in zip(X, labels):
            writer.writerow([repr(float(v)) for v in values] + [label])


def _open_binary(path: Path):
    if Path(path).suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_bytes(path: Path) -> bytes:
    try:
        with _open_binary(path) as f:
            return f.read()
    except OSError as exc:
        raise DataFormatError(f"cannot read: {exc}", str(path)) from None


def read_idx_images(path: Path) -> np.ndarray:
    """Read an IDX image file (magic 0x00000803) as an n x (rows*cols) matrix in [0, 1]."""
    data = _read_bytes(path)
    source = str(path)
    if len(data) < 16:
        raise DataFormatError("truncated header", source, offset=len(data))
    magic, count, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise DataFormatError(f"bad image magic 0x{magic:08x}", source, offset=0)
    expected = 16 + count * rows * cols
    if len(data) < expected:
        raise DataFormatError(f"expected {expected} bytes, found {len(data)}", source, offset=len(data))
    pixels = np.frombuffer(data, dtype=np.uint8, count=count * rows * cols, offset=16)
    return pixels.reshape(count, rows * cols).astype(float) / 255.0


def read_idx_labels(path: Path) -> np.ndarray:
    """Read an IDX label file (magic 0x00000801) as an integer vector."""
    data = _read_bytes(path)
    source = str(path)
    if len(data) < 8:
        raise DataFormatError("truncated header", source, offset=len(data))
    magic, count = struct.unpack(">II", data[:8])
    if magic != IDX_LABEL_MAGIC:
        raise DataFormatError(f"bad label magic 0x{magic:08x}", source, offset=0)
    if len(data) < 8 + count:
        raise DataFormatError(f"expected {8 + count} bytes, found {len(data)}", source, offset=len(data))
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=8).astype(int)


def read_idx(image_path: Path, label_path: Path) -> RawTable:
    images = read_idx_images(image_path)
    labels = read_idx_labels(label_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"{images.shape[0]} images but {labels.shape[0]} labels", str(label_path), offset=4
        )
    n_classes = int(labels.max()) + 1 if labels.size else 0
    return RawTable(X=images, Y=one_hot(labels, n_classes), class_names=tuple(str(i) for i in range(n_classes)))


def read_table(src: DatasetSource) -> RawTable:
    if src.format == "csv":
        return read_csv(src.paths[0], src.label_column)
    if len(src.paths) == 1:
        images = read_idx_images(src.paths[0])
        return RawTable(X=images, Y=np.zeros((images.shape[0], 0)), class_names=())
    return read_idx(src.paths[0], src.paths[1])


def align_classes(table: RawTable, class_names: Sequence[str]) -> RawTable:
    """Reorder the one-hot targets of ``table`` to follow ``class_names``."""
    index = {name: i for i, name in enumerate(class_names)}
    unknown = [name for name in table.class_names if name not in index]
    if unknown:
        raise DataFormatError(f"classes {unknown} are unknown to the model")
    Y = np.zeros((len(table), len(class_names)))
    for column, name in enumerate(table.class_names):
        Y[:, index[name]] = table.Y[:, column]
    return RawTable(X=table.X, Y=Y, class_names=tuple(class_names))


def load_dataset(src: DatasetSource, stats: Optional[NormalizationStats] = None) -> LabeledDataset:
    """
    Load a labeled dataset.

    Under ``minmax`` normalization the attributes are mapped to [0, 1] with
    ``stats`` (fitted on this data when not given); constant attributes map
    to 0.
    """
    table = read_table(src)
    if src.normalization == "minmax":
        return table.to_dataset(stats=stats or NormalizationStats.fit(table.X))
    return table.to_dataset()


def split_rows(count: int, test_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle of row indices into sorted (train, test) index arrays."""
    order = np.random.default_rng(seed).permutation(count)
    n_test = int(round(test_fraction * count))
    return np.sort(order[n_test:]), np.sort(order[:n_test])
