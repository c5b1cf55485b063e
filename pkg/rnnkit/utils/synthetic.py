"""Synthetic labeled datasets."""
from typing import Tuple

import numpy as np


def two_gaussians(
    count: int = 400,
    dims: int = 8,
    separation: float = 3.0,
    seed: int = 0,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Two isotropic unit-variance Gaussian classes of equal size.

    The class means differ by ``separation`` standard deviations in every
    coordinate. Returns raw attributes (not normalized) and integer labels.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(count) % 2
    rng.shuffle(labels)
    X = rng.standard_normal((count, dims)) + separation * labels[:, None]
    return X, labels
