"""Gradient-free training kernels: non-negative FISTA, pseudo-inverse, sigma transform."""
import logging
import math

import numpy as np
from scipy import linalg
from scipy.stats import zscore

from rnnkit.exceptions import ArgumentError, FistaDivergenceError
from rnnkit.models.numeric import FistaConfig, FistaResult, NnlsProblem

logger = logging.getLogger(__name__)

SIGMA_FLOOR = 0.1


def lipschitz_constant(A: np.ndarray) -> float:
    """Lipschitz constant 2 * sigma_max(A)^2 of the gradient of ||B - AW||^2."""
    return 2.0 * float(linalg.norm(A, 2)) ** 2


def run_fista(problem: NnlsProblem, cfg: FistaConfig = FistaConfig()) -> FistaResult:
    """
    Solve a non-negative l1-regularized least-squares problem with FISTA.

    Each iteration takes a gradient step from the extrapolated point,
    soft-thresholds, sets negative entries to zero and then applies the
    momentum extrapolation. The lowest-objective iterate is returned, so the
    result is never worse than W = 0.

    Raises:
        ArgumentError: A is all zeros
        FistaDivergenceError: an iterate became non-finite
    """
    A, B, reg = problem.A, problem.B, problem.reg
    if not np.any(A):
        raise ArgumentError("design matrix A is all zeros")

    step = 1.0 / lipschitz_constant(A) if cfg.step == "auto" else float(cfg.step)
    threshold = step * reg
    AtA = A.T @ A
    AtB = A.T @ B

    W = np.zeros((A.shape[1], B.shape[1]))
    Y = W
    t = 1.0
    best_W, best_obj = W, problem.objective(W)
    history = [best_obj]

    for iteration in range(1, cfg.max_iter + 1):
        V = Y - step * 2.0 * (AtA @ Y - AtB)
        V = np.sign(V) * np.maximum(np.abs(V) - threshold, 0.0)
        W_next = np.maximum(V, 0.0)
        if not np.all(np.isfinite(W_next)):
            raise FistaDivergenceError(f"non-finite iterate at iteration {iteration}", iteration=iteration)

        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        Y = W_next + ((t - 1.0) / t_next) * (W_next - W)
        W, t = W_next, t_next

        obj = problem.objective(W)
        history.append(obj)
        if obj < best_obj:
            best_W, best_obj = W, obj
        logger.debug("fista iteration %d objective %.6g", iteration, obj)

    return FistaResult(W=best_W, objective=best_obj, iterations=cfg.max_iter, step=step, history=history)


def fista_nnls(problem: NnlsProblem, cfg: FistaConfig = FistaConfig()) -> np.ndarray:
    """Non-negative solution W (m x n) of the problem; see run_fista."""
    return run_fista(problem, cfg).W


def pinv(A: np.ndarray) -> np.ndarray:
    """
    Moore-Penrose pseudo-inverse via SVD.

    Singular values at or below eps * max(A.shape) * sigma_max are treated
    as zero.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ArgumentError("pinv expects a matrix")
    if A.size == 0:
        return np.zeros(A.shape[::-1])
    U, s, Vt = linalg.svd(A, full_matrices=False)
    cutoff = np.finfo(float).eps * max(A.shape) * (s[0] if s.size else 0.0)
    s_inv = np.zeros_like(s)
    keep = s > cutoff
    s_inv[keep] = 1.0 / s[keep]
    return (Vt.T * s_inv) @ U.T


def sigma_transform(H: np.ndarray) -> np.ndarray:
    """
    Column-wise rescale and standardize, then shift everything positive.

    Each column is mapped linearly onto [0, 1] (constant columns become
    0.5), standardized with the sample standard deviation (zero-variance
    columns become 0), and finally the whole matrix is shifted by
    -min + 0.1 so its minimum is exactly 0.1.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim == 1:
        H = H[:, None]
    if H.size == 0:
        raise ArgumentError("sigma_transform needs a non-empty matrix")

    lo = H.min(axis=0)
    span = H.max(axis=0) - lo
    scaled = np.full_like(H, 0.5)
    varying = span > 0
    scaled[:, varying] = (H[:, varying] - lo[varying]) / span[varying]

    std = scaled.std(axis=0, ddof=1) if H.shape[0] > 1 else np.zeros(H.shape[1])
    standardized = np.zeros_like(scaled)
    spread = std > 0
    if np.any(spread):
        standardized[:, spread] = zscore(scaled[:, spread], axis=0, ddof=1)

    return standardized - standardized.min() + SIGMA_FLOOR
