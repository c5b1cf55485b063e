"""Multi-layer RNN classifier: trained model, training settings and datasets."""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field, field_validator

from rnnkit.exceptions import ArgumentError
from rnnkit.models.config import Settings
from rnnkit.models.numeric import FistaConfig


class TrainConfig(Settings):
    """
    Settings for gradient-free MLRNN training.

    ``hidden_layer_sizes`` lists the hidden widths N_2..N_{L+1}; every entry
    but the last is an inhibitory encoding layer configured by reconstruction,
    and the last (which must be even) hosts the SLANN-derived cells.
    """

    hidden_layer_sizes: Tuple[int, ...] = (100, 200)
    fista: FistaConfig = FistaConfig()
    reg: float = Field(default=1.0, ge=0.0)
    seed: int = Field(default=0, ge=0)
    rate_divisor: float = Field(default=5.0, gt=0.0)
    slann_weight_scale: float = Field(default=1.0, gt=0.0, le=1.0)
    test_fraction: float = Field(default=0.25, ge=0.0, lt=1.0)

    @field_validator("hidden_layer_sizes")
    @classmethod
    def _positive_sizes(cls, value):
        if not value or any(size < 1 for size in value):
            raise ValueError("hidden layer sizes must be at least 1")
        return tuple(value)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-attribute min/max taken from a training split."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "NormalizationStats":
        X = np.asarray(X, dtype=float)
        return cls(lo=X.min(axis=0), hi=X.max(axis=0))

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Map attributes to [0, 1]; constant attributes map to 0."""
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.lo.shape[0]:
            raise ArgumentError(f"expected {self.lo.shape[0]} attributes, got {X.shape[1]}")
        span = self.hi - self.lo
        out = np.zeros_like(X)
        varying = span > 0
        out[:, varying] = (X[:, varying] - self.lo[varying]) / span[varying]
        return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class LabeledDataset:
    """Non-negative instances (rows of X) with one-hot targets Y."""

    X: np.ndarray
    Y: np.ndarray
    class_names: Tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ArgumentError(f"inconsistent dataset shapes X{X.shape} Y{Y.shape}")
        if np.any(X < 0) or not np.all(np.isfinite(X)):
            raise ArgumentError("dataset attributes must be finite and non-negative")
        if np.any(Y < 0) or np.any(Y > 1):
            raise ArgumentError("targets must lie in [0, 1]")
        names = tuple(self.class_names) or tuple(str(i) for i in range(Y.shape[1]))
        if len(names) != Y.shape[1]:
            raise ArgumentError("class_names must match the number of target columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "class_names", names)

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.Y, axis=1)

    def __len__(self) -> int:
        return self.X.shape[0]


def one_hot(labels: Sequence[int], n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    Y = np.zeros((labels.shape[0], n_classes))
    Y[np.arange(labels.shape[0]), labels] = 1.0
    return Y


@dataclass(frozen=True)
class ChannelEncoder:
    """Channel-private inhibitory layers configured by reconstruction."""

    input_width: int
    inhibitory_weights: Tuple[np.ndarray, ...] = ()
    rates: Tuple[float, ...] = ()  # Lambda+ = R of the layer each weight matrix feeds

    @property
    def output_width(self) -> int:
        if self.inhibitory_weights:
            return self.inhibitory_weights[-1].shape[1]
        return self.input_width

    @property
    def output_rate(self) -> float:
        """Firing rate of the cells this channel hands to layer L (input cells fire at 1)."""
        return self.rates[-1] if self.rates else 1.0


@dataclass(frozen=True)
class MlrnnModel:
    """
    A trained multi-layer RNN.

    Layer L+1 holds the SLANN-derived cells: the first half receive
    external excitation alpha, the second half none, and all fire at rate
    alpha. Output cells are quasi-linear (r = 1, no inhibition).
    """

    layer_sizes: Tuple[int, ...]
    channels: Tuple[ChannelEncoder, ...]
    W_plus_L: np.ndarray
    W_minus_L: np.ndarray
    W_plus_readout: np.ndarray
    alpha: float
    output_lambda: np.ndarray
    offset: float
    class_names: Tuple[str, ...] = ()
    normalization: Optional[NormalizationStats] = None

    @property
    def depth(self) -> int:
        """Number of hidden layers L."""
        return len(self.layer_sizes) - 2

    @property
    def half_width(self) -> int:
        return self.W_plus_readout.shape[0] // 2

    @property
    def input_width(self) -> int:
        return sum(channel.input_width for channel in self.channels)

    @property
    def hidden_lambda(self) -> np.ndarray:
        h = self.half_width
        return np.concatenate([np.full(h, self.alpha), np.zeros(h)])

    @property
    def hidden_rate(self) -> np.ndarray:
        return np.full(2 * self.half_width, self.alpha)

    @property
    def layer_L_rates(self) -> np.ndarray:
        return np.concatenate([np.full(c.output_width, c.output_rate) for c in self.channels])

    @property
    def inhibitory_weights(self) -> Tuple[np.ndarray, ...]:
        """Encoding weights of a single-channel model."""
        return self._only_channel().inhibitory_weights

    @property
    def rates(self) -> Tuple[float, ...]:
        return self._only_channel().rates

    def _only_channel(self) -> ChannelEncoder:
        if len(self.channels) != 1:
            raise ArgumentError("model has several channels; use model.channels")
        return self.channels[0]

    def slann_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """Recover the SLANN input and output weights (W1_bar, W2_bar)."""
        h = self.half_width
        W1_bar = self.W_minus_L[:, :h]
        W2_bar = self.W_plus_readout[:h] - self.W_plus_readout[h:]
        return W1_bar, W2_bar

    def matrices(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for channel in self.channels:
            out.extend(channel.inhibitory_weights)
        out.extend([self.W_plus_L, self.W_minus_L, self.W_plus_readout])
        return out
