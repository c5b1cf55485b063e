"""
MLRN binary model files.

Layout (all integers little-endian)::

    b"MLRN" | u32 version | payload | u64 checksum

The checksum is the 8-byte BLAKE2b digest of the payload. Matrices are
stored as u32 rows, u32 cols and row-major '<f8' data.
"""
import hashlib
import io
import logging
import struct
from pathlib import Path
from typing import List

import numpy as np

from rnnkit.controllers.mlrnn import audit_model
from rnnkit.exceptions import ModelFileError
from rnnkit.models.mlrnn import ChannelEncoder, MlrnnModel, NormalizationStats

logger = logging.getLogger(__name__)

MAGIC = b"MLRN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sI")
_CHECKSUM = struct.Struct("<Q")


def payload_checksum(payload: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


class _Writer:
    def __init__(self):
        self.buffer = io.BytesIO()

    def u32(self, value: int) -> None:
        self.buffer.write(struct.pack("<I", int(value)))

    def f64(self, value: float) -> None:
        self.buffer.write(struct.pack("<d", float(value)))

    def vector(self, values: np.ndarray) -> None:
        values = np.ascontiguousarray(values, dtype="<f8")
        self.u32(values.shape[0])
        self.buffer.write(values.tobytes())

    def matrix(self, values: np.ndarray) -> None:
        values = np.ascontiguousarray(values, dtype="<f8")
        self.u32(values.shape[0])
        self.u32(values.shape[1])
        self.buffer.write(values.tobytes())

    def text(self, value: str) -> None:
        raw = value.encode("utf-8")
        self.u32(len(raw))
        self.buffer.write(raw)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.payload):
            raise ModelFileError(f"payload ends at byte {len(self.payload)}, needed {self.pos + count}", "truncated")
        chunk = self.payload[self.pos:self.pos + count]
        self.pos += count
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def vector(self) -> np.ndarray:
        n = self.u32()
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(float)

    def matrix(self) -> np.ndarray:
        rows, cols = self.u32(), self.u32()
        return np.frombuffer(self.take(8 * rows * cols), dtype="<f8").astype(float).reshape(rows, cols)

    def text(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def encode_model(model: MlrnnModel) -> bytes:
    out = _Writer()
    out.u32(len(model.layer_sizes))
    for size in model.layer_sizes:
        out.u32(size)
    out.u32(len(model.channels))
    for channel in model.channels:
        out.u32(channel.input_width)
        out.u32(len(channel.inhibitory_weights))
        for rate, W in zip(channel.rates, channel.inhibitory_weights):
            out.f64(rate)
            out.matrix(W)
    out.f64(model.alpha)
    out.f64(model.offset)
    out.matrix(model.W_plus_L)
    out.matrix(model.W_minus_L)
    out.matrix(model.W_plus_readout)
    out.vector(model.output_lambda)
    out.u32(len(model.class_names))
    for name in model.class_names:
        out.text(name)
    if model.normalization is None:
        out.u32(0)
    else:
        out.u32(1)
        out.vector(model.normalization.lo)
        out.vector(model.normalization.hi)
    payload = out.buffer.getvalue()
    return _HEADER.pack(MAGIC, FORMAT_VERSION) + payload + _CHECKSUM.pack(payload_checksum(payload))


def decode_model(data: bytes) -> MlrnnModel:
    """
    Parse and verify model bytes.

    Raises:
        ModelFileError: with ``check`` set to magic, version, truncated,
            checksum or audit
    """
    if len(data) < _HEADER.size:
        raise ModelFileError("file shorter than its header", "truncated")
    magic, version = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFileError(f"expected {MAGIC!r}, found {magic!r}", "magic")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported format version {version}", "version")
    if len(data) < _HEADER.size + _CHECKSUM.size:
        raise ModelFileError("file has no checksum", "truncated")
    payload = data[_HEADER.size:-_CHECKSUM.size]
    (stored,) = _CHECKSUM.unpack(data[-_CHECKSUM.size:])
    if stored != payload_checksum(payload):
        raise ModelFileError("payload does not match its checksum", "checksum")

    src = _Reader(payload)
    layer_sizes = tuple(src.u32() for _ in range(src.u32()))
    channels: List[ChannelEncoder] = []
    for _ in range(src.u32()):
        width = src.u32()
        rates, weights = [], []
        for _ in range(src.u32()):
            rates.append(src.f64())
            weights.append(src.matrix())
        channels.append(ChannelEncoder(input_width=width, inhibitory_weights=tuple(weights), rates=tuple(rates)))
    alpha = src.f64()
    offset = src.f64()
    W_plus_L, W_minus_L, W_plus_readout = src.matrix(), src.matrix(), src.matrix()
    output_lambda = src.vector()
    class_names = tuple(src.text() for _ in range(src.u32()))
    normalization = None
    if src.u32():
        normalization = NormalizationStats(lo=src.vector(), hi=src.vector())
    if src.pos != len(payload):
        raise ModelFileError(f"{len(payload) - src.pos} unexpected trailing bytes", "truncated")

    model = MlrnnModel(
        layer_sizes=layer_sizes,
        channels=tuple(channels),
        W_plus_L=W_plus_L,
        W_minus_L=W_minus_L,
        W_plus_readout=W_plus_readout,
        alpha=alpha,
        output_lambda=output_lambda,
        offset=offset,
        class_names=class_names,
        normalization=normalization,
    )
    _check_shapes(model)
    report = audit_model(model)
    if not report.passed:
        raise ModelFileError(str(report), "audit")
    return model


def _check_shapes(model: MlrnnModel) -> None:
    width = model.input_width
    for channel in model.channels:
        rows = channel.input_width
        for W in channel.inhibitory_weights:
            if W.shape[0] != rows:
                raise ModelFileError("inhibitory layer shapes do not chain", "audit")
            rows = W.shape[1]
    if not model.channels:
        raise ModelFileError("model has no input channels", "audit")
    rows_L = sum(c.output_width for c in model.channels)
    depths = {len(c.inhibitory_weights) for c in model.channels}
    if len(depths) > 1 or len(model.layer_sizes) != depths.pop() + 3:
        raise ModelFileError("layer count disagrees with layer sizes", "audit")
    if (
        model.layer_sizes[0] != width
        or model.W_plus_L.shape != (rows_L, model.layer_sizes[-2])
        or model.W_minus_L.shape != model.W_plus_L.shape
        or model.W_plus_readout.shape != (model.layer_sizes[-2], model.layer_sizes[-1])
        or model.output_lambda.shape != (model.layer_sizes[-1],)
        or (model.class_names and len(model.class_names) != model.layer_sizes[-1])
        or model.layer_sizes[-2] % 2
    ):
        raise ModelFileError("matrix shapes disagree with layer sizes", "audit")
    if model.normalization is not None and model.normalization.lo.shape != (width,):
        raise ModelFileError("normalization statistics have the wrong width", "audit")


def save_model(model: MlrnnModel, path: Path) -> None:
    """Write a model; the model must pass audit_model."""
    report = audit_model(model)
    if not report.passed:
        raise ModelFileError(str(report), "audit")
    Path(path).write_bytes(encode_model(model))
    logger.info("saved model with layer sizes %s to %s", model.layer_sizes, path)


def load_model(path: Path) -> MlrnnModel:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc.strerror}", "read") from None
    return decode_model(data)
