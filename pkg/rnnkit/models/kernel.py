"""Cell parameters, convolution kernels and images."""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import Field

from rnnkit.exceptions import ArgumentError
from rnnkit.models.config import Settings


class Scheme(str, Enum):
    """Kernel normalization scheme."""

    SINGLE = "single"
    TWIN = "twin"
    CLUSTER = "cluster"

    @property
    def target_abs_sum(self) -> float:
        return 0.1 if self is Scheme.CLUSTER else 1.0


class ActivationParams(Settings):
    """External excitatory rate and firing rate of a receptive cell."""

    lambda_plus: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    r: float = Field(default=0.1, ge=0.0, allow_inf_nan=False)


@dataclass(frozen=True)
class ConvKernel:
    """A signed kernel with its non-negative split."""

    W: np.ndarray
    W_plus: np.ndarray
    W_minus: np.ndarray
    scheme: Scheme

    def scaled(self, factor: float) -> "ConvKernel":
        """Same kernel and scheme with every weight multiplied by a positive factor."""
        if factor <= 0:
            raise ArgumentError("scale factor must be positive")
        return ConvKernel(
            W=self.W * factor,
            W_plus=self.W_plus * factor,
            W_minus=self.W_minus * factor,
            scheme=self.scheme,
        )


def as_image(image) -> np.ndarray:
    """Return ``image`` as a float matrix after checking it lies in [0,1]."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ArgumentError(f"image must be 2-D, got shape {image.shape}")
    if not np.all(np.isfinite(image)) or image.min(initial=0.0) < 0 or image.max(initial=0.0) > 1:
        raise ArgumentError("image intensities must lie in [0,1]")
    return image
