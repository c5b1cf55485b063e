"""Continuous-time Monte Carlo simulation of the spiking RNN dynamics."""
import logging
import math
from bisect import bisect_left, bisect_right
from itertools import accumulate
from typing import List

import numpy as np

from rnnkit.controllers.steady_state import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_steady_state, validate_network
from rnnkit.exceptions import ArgumentError, DegenerateProcessError
from rnnkit.models.network import RnnNetwork
from rnnkit.models.simulation import AgreementReport, SimConfig, SimResult

logger = logging.getLogger(__name__)

GENERATOR = "PCG64"
_BLOCK = 1 << 16

EVENT_KINDS = (
    "external_excitatory",
    "external_inhibitory",
    "firings",
    "internal_excitatory",
    "internal_inhibitory",
    "departures",
)


class _RandomStream:
    """Block-buffered uniform and exponential draws from one generator."""

    def __init__(self, seed: int):
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._uniform: List[float] = []
        self._expo: List[float] = []
        self._ui = 0
        self._ei = 0

    def uniform(self) -> float:
        if self._ui == len(self._uniform):
            self._uniform = self._rng.random(_BLOCK).tolist()
            self._ui = 0
        value = self._uniform[self._ui]
        self._ui += 1
        return value

    def exponential(self) -> float:
        if self._ei == len(self._expo):
            self._expo = self._rng.standard_exponential(_BLOCK).tolist()
            self._ei = 0
        value = self._expo[self._ei]
        self._ei += 1
        return value


def _routing_tables(net: RnnNetwork) -> List[List[float]]:
    """Cumulative routing probabilities per neuron over [p+ to j..., p- to j..., departure]."""
    tables = []
    for i in range(net.L):
        if net.r[i] <= 0:
            tables.append([])
            continue
        probs = np.concatenate([net.W_plus[i], net.W_minus[i]]) / net.r[i]
        tables.append(list(accumulate(probs.tolist())))
    return tables


def simulate(net: RnnNetwork, cfg: SimConfig) -> SimResult:
    """
    Simulate the integer-potential jump process and estimate q.

    Event times come from one global exponential clock whose total rate is
    updated incrementally; the event is then chosen with probability
    proportional to its rate. q_hat is the post-burn-in time fraction each
    neuron spends with positive potential.

    Raises:
        ArgumentError: network fails validation
        DegenerateProcessError: every configured rate is zero
    """
    report = validate_network(net)
    if not report.passed:
        raise ArgumentError(f"invalid network: {report}")
    if not (np.any(net.Lambda_plus > 0) or np.any(net.lambda_minus > 0) or np.any(net.r > 0)):
        raise DegenerateProcessError("all arrival and firing rates are zero")

    size = net.L
    lam_p = net.Lambda_plus.tolist()
    lam_m = net.lambda_minus.tolist()
    rates = net.r.tolist()
    cum_p = list(accumulate(lam_p))
    cum_m = list(accumulate(lam_m))
    sum_p = cum_p[-1]
    sum_m = cum_m[-1]
    base = sum_p + sum_m
    routing = _routing_tables(net)
    counts = dict.fromkeys(EVENT_KINDS, 0)

    if base == 0:
        # potentials start at zero and nothing can ever excite a neuron
        logger.warning("absorbing start state: no external arrivals, q_hat is identically zero")
        return SimResult(
            q_hat=np.zeros(size),
            model_time=math.inf,
            measured_time=math.inf,
            event_counts=counts,
            generator=GENERATOR,
            seed=cfg.seed,
        )

    stream = _RandomStream(cfg.seed)
    k = [0] * size
    busy_since = [0.0] * size
    busy_time = [0.0] * size
    firing_total = 0.0
    t = 0.0

    block = max(1, cfg.total_events // cfg.checkpoints)
    checkpoint_times = [0.0]
    checkpoint_busy = [[0.0] * size]

    def excite(j: int) -> float:
        k[j] += 1
        if k[j] == 1:
            busy_since[j] = t
            return rates[j]
        return 0.0

    def inhibit(j: int) -> bool:
        """Remove one unit of potential; True when the neuron goes idle."""
        if k[j] > 0:
            k[j] -= 1
            if k[j] == 0:
                busy_time[j] += t - busy_since[j]
                return True
        return False

    def busy_rate() -> float:
        return sum(rates[i] for i in range(size) if k[i] > 0)

    for event in range(1, cfg.total_events + 1):
        total = base + firing_total
        t += stream.exponential() / total
        u = stream.uniform() * total

        if u < sum_p:
            j = min(bisect_right(cum_p, u), size - 1)
            firing_total += excite(j)
            counts["external_excitatory"] += 1
        elif u < base:
            j = min(bisect_right(cum_m, u - sum_p), size - 1)
            if inhibit(j):
                firing_total = busy_rate()
            counts["external_inhibitory"] += 1
        else:
            u -= base
            source = -1
            for i in range(size):
                if k[i] > 0 and rates[i] > 0:
                    source = i
                    if u < rates[i]:
                        break
                    u -= rates[i]
            if source < 0:
                # rounding left a stale firing rate with every neuron idle
                firing_total = busy_rate()
            else:
                counts["firings"] += 1
                idle = inhibit(source)
                target = bisect_right(routing[source], stream.uniform())
                if target < size:
                    firing_total += excite(target)
                    counts["internal_excitatory"] += 1
                elif target < 2 * size:
                    idle = inhibit(target - size) or idle
                    counts["internal_inhibitory"] += 1
                else:
                    counts["departures"] += 1
                if idle:
                    firing_total = busy_rate()

        if event % block == 0 or event == cfg.total_events:
            snapshot = [
                busy_time[i] + (t - busy_since[i] if k[i] > 0 else 0.0) for i in range(size)
            ]
            checkpoint_times.append(t)
            checkpoint_busy.append(snapshot)

    # statistics start at the first checkpoint at or after the burn-in time
    start = min(bisect_left(checkpoint_times, cfg.burn_in_fraction * t), len(checkpoint_times) - 2)
    window = t - checkpoint_times[start]
    q_hat = (np.array(checkpoint_busy[-1]) - np.array(checkpoint_busy[start])) / window
    q_hat = np.clip(q_hat, 0.0, 1.0)

    logger.info(
        "simulated %d events over model time %.3f (measured %.3f) seed=%d generator=%s",
        cfg.total_events, t, window, cfg.seed, GENERATOR,
    )
    return SimResult(
        q_hat=q_hat,
        model_time=t,
        measured_time=window,
        event_counts=counts,
        generator=GENERATOR,
        seed=cfg.seed,
    )


def compare_to_analytic(
    net: RnnNetwork,
    cfg: SimConfig,
    tol: float,
    solver_tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> AgreementReport:
    """Run the simulator and the analytic solver and compare them per neuron."""
    if tol < 0:
        raise ArgumentError("tol must be non-negative")
    steady = solve_steady_state(net, tol=solver_tol, max_iter=max_iter)
    sim = simulate(net, cfg)
    deviations = np.abs(sim.q_hat - steady.q)
    max_dev = float(deviations.max())
    return AgreementReport(
        q=steady.q,
        q_hat=sim.q_hat,
        deviations=deviations,
        max_deviation=max_dev,
        tol=tol,
        passed=max_dev <= tol,
        sim=sim,
    )
