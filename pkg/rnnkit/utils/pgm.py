"""Binary (P5) PGM grayscale images."""
import re
from pathlib import Path
from typing import Tuple

import numpy as np

from rnnkit.exceptions import DataFormatError

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*([^\s#]+)")


def read_pgm(path: Path) -> np.ndarray:
    """Read an 8-bit P5 image as a float matrix in [0, 1]."""
    source = str(path)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read: {exc.strerror}", source) from None

    tokens = []
    pos = 0
    for _ in range(4):
        match = _TOKEN.match(data, pos)
        if match is None:
            raise DataFormatError("truncated header", source, offset=pos)
        tokens.append(match.group(1))
        pos = match.end()
    if tokens[0] != b"P5":
        raise DataFormatError(f"not a binary PGM (magic {tokens[0][:2]!r})", source, offset=0)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataFormatError("malformed header", source, offset=pos) from None
    if not 0 < maxval < 256:
        raise DataFormatError(f"only 8-bit images are supported (maxval {maxval})", source, offset=pos)
    pos += 1  # single whitespace byte before the raster
    if len(data) - pos < width * height:
        raise DataFormatError(f"expected {width * height} pixels", source, offset=len(data))
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width).astype(float) / maxval


def to_bytes(image: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """
    Affinely rescale an image to 0..255.

    Returns the 8-bit raster with the (lo, hi) values mapped to 0 and 255;
    a constant image maps to 0.
    """
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    if hi > lo:
        scaled = np.rint((image - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(image)
    return scaled.astype(np.uint8), lo, hi


def write_pgm(path: Path, image: np.ndarray) -> Tuple[float, float]:
    """Write ``image`` as P5 after affine rescale; returns the (lo, hi) mapped to 0 and 255."""
    raster, lo, hi = to_bytes(image)
    height, width = raster.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.tobytes())
    return lo, hi
