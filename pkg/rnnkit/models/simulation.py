"""Simulator configuration and result records."""
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from pydantic import Field

from rnnkit.models.config import Settings


class SimConfig(Settings):
    """Settings for one Monte Carlo run of the spiking dynamics."""

    total_events: int = Field(default=1_000_000, ge=1)
    burn_in_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    checkpoints: int = Field(default=1000, ge=1)  # burn-in granularity


@dataclass(frozen=True)
class SimResult:
    """Empirical excitation probabilities from one simulated trajectory."""

    q_hat: np.ndarray
    model_time: float
    measured_time: float
    event_counts: Dict[str, int] = field(default_factory=dict)
    generator: str = "PCG64"
    seed: int = 0


@dataclass(frozen=True)
class AgreementReport:
    """Per-neuron comparison of simulated and analytic probabilities."""

    q: np.ndarray
    q_hat: np.ndarray
    deviations: np.ndarray
    max_deviation: float
    tol: float
    passed: bool
    sim: SimResult
