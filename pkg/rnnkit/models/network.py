"""Random neural network model and its steady-state record."""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from rnnkit.exceptions import ArgumentError

# Slack allowed when comparing an outgoing row sum with a firing rate.
ROW_SUM_SLACK = 1e-12


@dataclass(frozen=True)
class Violation:
    """One broken RNN constraint."""

    neuron: int
    constraint: str  # "non-finite", "negative", "row-sum", "silent-row"
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Result of checking a network against the RNN constraints."""

    violations: List[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.passed:
            return "pass"
        return "; ".join(f"neuron {v.neuron}: {v.message}" for v in self.violations)


def check_rows(
    w_plus: np.ndarray,
    w_minus: np.ndarray,
    r: np.ndarray,
    offset: int = 0,
) -> List[Violation]:
    """
    Check outgoing weight rows against firing rates.

    Shared by network validation and the per-layer MLRNN audit; ``offset``
    shifts reported neuron indices so layers can report global positions.
    """
    violations: List[Violation] = []
    w_plus = np.asarray(w_plus, dtype=float)
    w_minus = np.asarray(w_minus, dtype=float)
    r = np.asarray(r, dtype=float)

    for i in range(r.shape[0]):
        idx = offset + i
        row_p, row_m, rate = w_plus[i], w_minus[i], r[i]
        if not (np.all(np.isfinite(row_p)) and np.all(np.isfinite(row_m)) and np.isfinite(rate)):
            violations.append(Violation(idx, "non-finite", "non-finite entry"))
            continue
        if rate < 0 or np.any(row_p < 0) or np.any(row_m < 0):
            violations.append(Violation(idx, "negative", "negative rate or weight"))
            continue
        total = float(row_p.sum() + row_m.sum())
        if rate == 0 and total > 0:
            violations.append(
                Violation(idx, "silent-row", f"r is 0 but outgoing weights sum to {total:g}")
            )
        elif total > rate + ROW_SUM_SLACK * max(1.0, rate):
            violations.append(
                Violation(idx, "row-sum", f"row sum {total:g} > r {rate:g}")
            )
    return violations


@dataclass(frozen=True)
class RnnNetwork:
    """
    A recurrent network of L spiking neurons.

    ``W_plus[i, j]`` and ``W_minus[i, j]`` are the excitatory and inhibitory
    rates of spikes sent from neuron i to neuron j (``r_i * p_ij``).
    Arrays are copied and made read-only on construction.
    """

    W_plus: np.ndarray
    W_minus: np.ndarray
    r: np.ndarray
    Lambda_plus: np.ndarray
    lambda_minus: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("W_plus", "W_minus", "r", "Lambda_plus", "lambda_minus"):
            value = np.array(getattr(self, name), dtype=float)
            value.setflags(write=False)
            arrays[name] = value
        size = arrays["r"].shape[0] if arrays["r"].ndim == 1 else -1
        if size < 1:
            raise ArgumentError("r must be a non-empty vector")
        for name in ("Lambda_plus", "lambda_minus"):
            if arrays[name].shape != (size,):
                raise ArgumentError(f"{name} must have length {size}")
        for name in ("W_plus", "W_minus"):
            if arrays[name].shape != (size, size):
                raise ArgumentError(f"{name} must be {size}x{size}")
        for name, value in arrays.items():
            object.__setattr__(self, name, value)

    @property
    def L(self) -> int:
        return self.r.shape[0]

    @property
    def departure_probability(self) -> np.ndarray:
        """Probability nu_i that a spike fired by neuron i leaves the network."""
        out = np.ones(self.L)
        active = self.r > 0
        out[active] = 1.0 - (self.W_plus[active].sum(axis=1) + self.W_minus[active].sum(axis=1)) / self.r[active]
        return out

    def scaled(self, factor: float) -> "RnnNetwork":
        """Return the network with every rate multiplied by ``factor``."""
        return RnnNetwork(
            W_plus=self.W_plus * factor,
            W_minus=self.W_minus * factor,
            r=self.r * factor,
            Lambda_plus=self.Lambda_plus * factor,
            lambda_minus=self.lambda_minus * factor,
        )

    @classmethod
    def isolated(cls, Lambda: float, r: float, lam: float = 0.0) -> "RnnNetwork":
        """Single neuron with no recurrent connections."""
        return cls(
            W_plus=np.zeros((1, 1)),
            W_minus=np.zeros((1, 1)),
            r=np.array([r]),
            Lambda_plus=np.array([Lambda]),
            lambda_minus=np.array([lam]),
        )

    @classmethod
    def random(
        cls,
        size: int,
        rng: np.random.Generator,
        density: float = 0.6,
        max_routing: float = 0.9,
    ) -> "RnnNetwork":
        """
        Draw a random network that satisfies the RNN constraints.

        Args:
            size: Number of neurons
            rng: Seeded numpy generator
            density: Probability that a directed edge exists
            max_routing: Upper bound on the probability a spike stays in the network

        Returns:
            A valid RnnNetwork
        """
        r = rng.uniform(0.5, 1.5, size)
        Lambda_plus = rng.uniform(0.05, 0.6, size)
        lambda_minus = rng.uniform(0.0, 0.3, size)
        mask_p = rng.random((size, size)) < density
        mask_m = rng.random((size, size)) < density
        p_plus = rng.random((size, size)) * mask_p
        p_minus = rng.random((size, size)) * mask_m
        totals = p_plus.sum(axis=1) + p_minus.sum(axis=1)
        keep = rng.uniform(0.2, max_routing, size)
        scale = np.divide(keep, totals, out=np.zeros(size), where=totals > 0)
        p_plus *= scale[:, None]
        p_minus *= scale[:, None]
        return cls(
            W_plus=p_plus * r[:, None],
            W_minus=p_minus * r[:, None],
            r=r,
            Lambda_plus=Lambda_plus,
            lambda_minus=lambda_minus,
        )


@dataclass(frozen=True)
class SteadyState:
    """Stationary excitation probabilities found by the fixed-point solver."""

    q: np.ndarray
    iterations: int
    residual: float
