"""Product-form steady state of a random neural network."""
import logging
from typing import Optional

import numpy as np

from rnnkit.exceptions import ArgumentError, ConvergenceError
from rnnkit.models.network import RnnNetwork, SteadyState, ValidationReport, Violation, check_rows

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


def validate_network(net: RnnNetwork) -> ValidationReport:
    """
    Check a candidate network against the RNN constraints.

    Violations are returned as data; nothing is raised.
    """
    violations = check_rows(net.W_plus, net.W_minus, net.r)
    flagged = {v.neuron for v in violations}
    for i in range(net.L):
        if i in flagged:
            continue
        arrivals = (net.Lambda_plus[i], net.lambda_minus[i])
        if not all(np.isfinite(a) for a in arrivals):
            violations.append(Violation(i, "non-finite", "non-finite external arrival rate"))
        elif any(a < 0 for a in arrivals):
            violations.append(Violation(i, "negative", "negative external arrival rate"))
    violations.sort(key=lambda v: v.neuron)
    return ValidationReport(violations)


def excitation_map(net: RnnNetwork, q: np.ndarray) -> np.ndarray:
    """
    One Jacobi sweep of the steady-state equations.

    Returns min(lambda_plus / (r + lambda_minus), 1) computed from the
    previous iterate only. A neuron with zero denominator is clamped to 1
    when it receives excitation and defined as 0 when it receives none.
    """
    exc = net.Lambda_plus + q @ net.W_plus
    inh = net.lambda_minus + q @ net.W_minus
    denom = net.r + inh
    out = np.zeros_like(exc)
    positive = denom > 0
    out[positive] = np.minimum(exc[positive] / denom[positive], 1.0)
    out[~positive & (exc > 0)] = 1.0
    return out


def fixed_point_residual(net: RnnNetwork, q: np.ndarray) -> float:
    """Max-norm defect of ``q`` against the steady-state equations."""
    q = np.asarray(q, dtype=float)
    if q.shape != (net.L,):
        raise ArgumentError(f"q has shape {q.shape}, expected ({net.L},)")
    return float(np.max(np.abs(q - excitation_map(net, q))))


def solve_steady_state(
    net: RnnNetwork,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    q0: Optional[np.ndarray] = None,
) -> SteadyState:
    """
    Solve for the stationary excitation probabilities by successive substitution.

    Args:
        net: A network that passes validate_network
        tol: Max-norm tolerance on the fixed-point defect
        max_iter: Maximum number of full sweeps
        q0: Starting point in [0,1]^L (zeros when omitted)

    Returns:
        SteadyState with q, sweep count and final residual

    Raises:
        ArgumentError: invalid network or parameters
        ConvergenceError: tolerance not met within max_iter sweeps
    """
    if tol <= 0:
        raise ArgumentError("tol must be positive")
    if max_iter < 1:
        raise ArgumentError("max_iter must be at least 1")
    report = validate_network(net)
    if not report.passed:
        raise ArgumentError(f"invalid network: {report}")

    if q0 is None:
        q = np.zeros(net.L)
    else:
        q = np.clip(np.asarray(q0, dtype=float), 0.0, 1.0)
        if q.shape != (net.L,):
            raise ArgumentError(f"q0 has shape {q.shape}, expected ({net.L},)")

    residual = np.inf
    for iteration in range(1, max_iter + 1):
        q_next = excitation_map(net, q)
        residual = float(np.max(np.abs(q_next - q)))
        q = q_next
        if residual <= tol:
            # residual of the returned iterate, not of the step
            residual = fixed_point_residual(net, q)
            if residual <= tol:
                logger.info("steady state converged: L=%d sweeps=%d residual=%.3e", net.L, iteration, residual)
                return SteadyState(q=q, iterations=iteration, residual=residual)

    raise ConvergenceError(
        f"no convergence after {max_iter} sweeps (residual {residual:.3e} > tol {tol:.3e})",
        last_iterate=q,
        residual=residual,
        iterations=max_iter,
    )
