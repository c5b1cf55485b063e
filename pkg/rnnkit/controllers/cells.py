"""Single-cell and cluster activations of quasi-linear RNN cells."""
import logging
from typing import Union

import numpy as np

from rnnkit.exceptions import ArgumentError
from rnnkit.models.kernel import ActivationParams
from rnnkit.models.network import RnnNetwork

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# (lambda_minus + inh) / r above this is outside the first-order regime
FIRST_ORDER_REGIME = 0.1


def _non_negative(name: str, value: ArrayLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ArgumentError(f"{name} must be non-negative")
    return arr


def _unwrap(arr: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(arr) if np.ndim(like) == 0 else arr


def phi_cell(x_plus: ArrayLike, x_minus: ArrayLike, params: ActivationParams = ActivationParams()) -> ArrayLike:
    """
    Steady-state excitation of one cell: min((lambda + x+) / (r + x-), 1).

    Applied element-wise to arrays. A cell with excitation but a zero
    denominator saturates at 1; one with neither is 0.
    """
    return layer_activation(x_plus, x_minus, params.lambda_plus, params.r)


def layer_activation(x_plus: ArrayLike, x_minus: ArrayLike, lambda_plus: ArrayLike, r: ArrayLike) -> ArrayLike:
    """phi with per-cell rates; lambda_plus and r broadcast against the inputs."""
    xp = _non_negative("x_plus", x_plus)
    xm = _non_negative("x_minus", x_minus)
    num = _non_negative("lambda_plus", lambda_plus) + xp
    den = _non_negative("r", r) + xm
    num, den = np.broadcast_arrays(num, den)
    out = np.where(num > 0, 1.0, 0.0)
    np.divide(num, den, out=out, where=den > 0)
    out = np.minimum(out, 1.0)
    return float(out) if out.ndim == 0 else out


def lrnn_e(x: ArrayLike) -> ArrayLike:
    """Quasi-linear excitatory cell: min(x, 1)."""
    return phi_cell(x, 0.0, ActivationParams(lambda_plus=0.0, r=1.0))


def lrnn_i(x: ArrayLike) -> ArrayLike:
    """Cell driven only by inhibition: 1 / (1 + x)."""
    return phi_cell(0.0, x, ActivationParams(lambda_plus=1.0, r=1.0))


def lrnn_i_approx(x: ArrayLike) -> ArrayLike:
    """First-order form of lrnn_i, clipped to [0, 1]."""
    arr = _non_negative("x", x)
    return _unwrap(np.clip(1.0 - arr, 0.0, 1.0), x)


def first_order_approx(
    lambda_plus: ArrayLike,
    lambda_minus: ArrayLike,
    r: float,
    exc_sum: ArrayLike,
    inh_sum: ArrayLike,
    check_regime: bool = False,
) -> ArrayLike:
    """
    First-order expansion of the cell equation around zero inhibition.

    Returns ((lambda+ + exc) / r) * (1 - (lambda- + inh) / r). With
    ``check_regime`` a warning is logged when the inhibitory term is not
    small against r.
    """
    if r <= 0:
        raise ArgumentError("r must be positive for the first-order approximation")
    inhibition = (np.asarray(lambda_minus, dtype=float) + np.asarray(inh_sum, dtype=float)) / r
    if check_regime and np.any(inhibition > FIRST_ORDER_REGIME):
        logger.warning(
            "first-order approximation used with inhibition/r up to %.3g (regime bound %.3g)",
            float(np.max(inhibition)), FIRST_ORDER_REGIME,
        )
    value = (np.asarray(lambda_plus, dtype=float) + np.asarray(exc_sum, dtype=float)) / r * (1.0 - inhibition)
    return float(value) if np.ndim(value) == 0 else value


def cluster_activation(x_plus: ArrayLike, x_minus: ArrayLike) -> ArrayLike:
    """ReLU-cluster activation min(1 / (1 + x+) + x-, 1), approximately 1 - ReLU(x+ - x-)."""
    xp = _non_negative("x_plus", x_plus)
    xm = _non_negative("x_minus", x_minus)
    out = np.minimum(1.0 / (1.0 + xp) + xm, 1.0)
    return float(out) if out.ndim == 0 else out


def cluster_network(x: np.ndarray, w: np.ndarray) -> RnnNetwork:
    """
    Build the explicit cell network behind cluster_activation.

    Cells 0..V-1 are LRNN-E input cells driven at rate x_v. Cell V is an
    LRNN-E cell excited through w-, cell V+1 an LRNN-I cell inhibited
    through w+, and cell V+2 the LRNN-E output cell excited by both with
    weight 1.

    Args:
        x: Input vector in [0, 1]
        w: Signed weight vector with sum(|w|) <= 1

    Returns:
        RnnNetwork whose steady state at cell V+2 is
        cluster_activation(x @ w+, x @ w-) whenever x @ w- <= 1
    """
    x = np.asarray(x, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if x.shape != w.shape:
        raise ArgumentError("x and w must have the same length")
    if np.abs(w).sum() > 1.0 + 1e-12:
        raise ArgumentError("sum(|w|) must not exceed 1")
    v = x.shape[0]
    size = v + 3
    W_plus = np.zeros((size, size))
    W_minus = np.zeros((size, size))
    W_plus[:v, v] = np.maximum(-w, 0.0)
    W_minus[:v, v + 1] = np.maximum(w, 0.0)
    W_plus[v, v + 2] = 1.0
    W_plus[v + 1, v + 2] = 1.0
    Lambda_plus = np.zeros(size)
    Lambda_plus[:v] = x
    Lambda_plus[v + 1] = 1.0
    return RnnNetwork(
        W_plus=W_plus,
        W_minus=W_minus,
        r=np.ones(size),
        Lambda_plus=Lambda_plus,
        lambda_minus=np.zeros(size),
    )
