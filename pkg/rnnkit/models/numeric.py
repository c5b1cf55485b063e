"""Problem and configuration records for the training kernels."""
from dataclasses import dataclass, field
from typing import List, Literal, Union

import numpy as np
from pydantic import Field, field_validator

from rnnkit.exceptions import ArgumentError
from rnnkit.models.config import Settings


@dataclass(frozen=True)
class NnlsProblem:
    """min ||B - A W||^2 + reg * ||W||_1 subject to W >= 0."""

    A: np.ndarray
    B: np.ndarray
    reg: float = 1.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if A.ndim != 2 or B.ndim != 2 or A.shape[0] != B.shape[0]:
            raise ArgumentError(f"inconsistent problem shapes A{A.shape} B{B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ArgumentError("problem entries must be finite")
        if self.reg < 0:
            raise ArgumentError("reg must be non-negative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def objective(self, W: np.ndarray) -> float:
        residual = self.B - self.A @ W
        return float(np.sum(residual * residual) + self.reg * np.abs(W).sum())


class FistaConfig(Settings):
    """Iteration count and step size of the non-negative FISTA solver."""

    max_iter: int = Field(default=100, ge=1)
    step: Union[Literal["auto"], float] = "auto"
    seed: int = Field(default=0, ge=0)  # unused while every sub-step is deterministic

    @field_validator("step")
    @classmethod
    def _positive_step(cls, value):
        if value != "auto" and not value > 0:
            raise ValueError("step must be positive or 'auto'")
        return value


@dataclass(frozen=True)
class FistaResult:
    """Outcome of one FISTA run."""

    W: np.ndarray
    objective: float
    iterations: int
    step: float
    history: List[float] = field(default_factory=list)
