"""
Plain-text formats: network descriptions, kernels and training configs.

Network file grammar (``#`` starts a comment, blank lines are ignored)::

    L = 2
    r = 1 1
    Lambda_plus = 0.5 0.5
    lambda_minus = 0 0          # optional, defaults to zeros
    [W_plus]                    # optional block, defaults to zeros
    0 0
    0 0
    [W_minus]
    0 1
    1 0

Kernel files are whitespace-separated rows of numbers. Training configs are
flat ``key = value`` lines.
"""
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from rnnkit.exceptions import ArgumentError, DataFormatError
from rnnkit.models.mlrnn import TrainConfig
from rnnkit.models.network import RnnNetwork
from rnnkit.models.numeric import FistaConfig

logger = logging.getLogger(__name__)

VECTOR_KEYS = ("r", "Lambda_plus", "lambda_minus")
MATRIX_KEYS = ("W_plus", "W_minus")


def _lines(path: Path) -> Iterator[Tuple[int, str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read: {exc.strerror}", str(path)) from None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _numbers(text: str, source: str, line: int) -> List[float]:
    try:
        values = [float(token) for token in text.split()]
    except ValueError:
        raise DataFormatError(f"non-numeric entry in {text!r}", source, line=line) from None
    if not all(np.isfinite(values)):
        raise DataFormatError("non-finite entry", source, line=line)
    return values


def read_network(path: Path) -> RnnNetwork:
    """Parse a network description file."""
    source = str(path)
    size: Optional[int] = None
    vectors: Dict[str, np.ndarray] = {}
    matrices: Dict[str, List[List[float]]] = {}
    block: Optional[str] = None
    block_line: Dict[str, int] = {}

    for number, line in _lines(path):
        if line.startswith("["):
            name = line.strip("[]").strip()
            if not line.endswith("]") or name not in MATRIX_KEYS:
                raise DataFormatError(f"unknown block {line!r}", source, line=number)
            if name in matrices:
                raise DataFormatError(f"duplicate block [{name}]", source, line=number)
            block = name
            matrices[name] = []
            block_line[name] = number
        elif "=" in line:
            block = None
            key, _, value = (part.strip() for part in line.partition("="))
            if key == "L":
                try:
                    size = int(value)
                except ValueError:
                    raise DataFormatError(f"L must be an integer, got {value!r}", source, line=number) from None
                if size < 1:
                    raise DataFormatError("L must be at least 1", source, line=number)
            elif key in VECTOR_KEYS:
                vectors[key] = np.array(_numbers(value, source, number))
            else:
                raise DataFormatError(f"unknown key {key!r}", source, line=number)
        elif block is not None:
            matrices[block].append(_numbers(line, source, number))
        else:
            raise DataFormatError(f"unexpected line {line!r}", source, line=number)

    if size is None:
        raise DataFormatError("missing 'L = <count>' line", source)
    for key in ("r", "Lambda_plus"):
        if key not in vectors:
            raise DataFormatError(f"missing vector {key!r}", source)
    vectors.setdefault("lambda_minus", np.zeros(size))
    for key, vector in vectors.items():
        if vector.shape != (size,):
            raise DataFormatError(f"{key} has {vector.shape[0]} entries, expected {size}", source)

    weights = {}
    for key in MATRIX_KEYS:
        rows = matrices.get(key)
        if rows is None:
            weights[key] = np.zeros((size, size))
            continue
        if len(rows) != size or any(len(row) != size for row in rows):
            raise DataFormatError(f"[{key}] must be {size}x{size}", source, line=block_line[key])
        weights[key] = np.array(rows)

    try:
        return RnnNetwork(
            W_plus=weights["W_plus"],
            W_minus=weights["W_minus"],
            r=vectors["r"],
            Lambda_plus=vectors["Lambda_plus"],
            lambda_minus=vectors["lambda_minus"],
        )
    except ArgumentError as exc:
        raise DataFormatError(str(exc), source) from None


def _format_row(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in values)


def write_network(net: RnnNetwork, path: Path) -> None:
    """Write a network in the format read_network accepts, at full precision."""
    lines = [f"L = {net.L}"]
    for key in VECTOR_KEYS:
        lines.append(f"{key} = {_format_row(getattr(net, key))}")
    for key in MATRIX_KEYS:
        lines.append(f"[{key}]")
        lines.extend(_format_row(row) for row in getattr(net, key))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_kernel(path: Path) -> np.ndarray:
    """Parse a rectangular kernel matrix."""
    source = str(path)
    rows = []
    for number, line in _lines(path):
        rows.append(_numbers(line, source, number))
        if len(rows[-1]) != len(rows[0]):
            raise DataFormatError("ragged kernel row", source, line=number)
    if not rows:
        raise DataFormatError("empty kernel", source)
    return np.array(rows)


CONFIG_KEYS = (
    "hidden_layer_sizes",
    "seed",
    "rate_divisor",
    "slann_weight_scale",
    "fista_max_iter",
    "fista_reg",
    "fista_step",
    "test_fraction",
)


def read_train_config(path: Path, **overrides) -> TrainConfig:
    """
    Parse a ``key = value`` training config.

    Unknown or repeated keys are errors. ``overrides`` (already typed)
    replace file values, e.g. a command-line seed.
    """
    source = str(path)
    raw: Dict[str, str] = {}
    for number, line in _lines(path):
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise DataFormatError(f"expected 'key = value', got {line!r}", source, line=number)
        if key not in CONFIG_KEYS:
            raise DataFormatError(f"unknown key {key!r}", source, line=number)
        if key in raw:
            raise DataFormatError(f"duplicate key {key!r}", source, line=number)
        raw[key] = value
    return build_train_config(raw, **overrides)


def build_train_config(raw: Dict[str, str], **overrides) -> TrainConfig:
    """Map flat config values onto TrainConfig and its nested FistaConfig."""
    values: Dict[str, object] = {}
    fista: Dict[str, object] = {}
    for key, value in raw.items():
        if key == "hidden_layer_sizes":
            values[key] = parse_sizes(value)
        elif key == "fista_max_iter":
            fista["max_iter"] = value
        elif key == "fista_step":
            fista["step"] = value if value == "auto" else _float(key, value)
        elif key == "fista_reg":
            values["reg"] = value
        else:
            values[key] = value
    values.update({k: v for k, v in overrides.items() if v is not None})
    if fista:
        values["fista"] = FistaConfig.build(**fista)
    return TrainConfig.build(**values)


def parse_sizes(value: str) -> Tuple[int, ...]:
    """Parse "100,200" (or space separated) layer sizes."""
    try:
        return tuple(int(part) for part in value.replace(",", " ").split())
    except ValueError:
        raise ArgumentError(f"layer sizes must be integers, got {value!r}") from None


def _float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ArgumentError(f"{key} must be a number, got {value!r}") from None
