"""Image convolution built from RNN cells: single-cell, twin-cell and ReLU-cluster."""
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.signal import correlate2d

from rnnkit.controllers.cells import cluster_activation, phi_cell
from rnnkit.exceptions import ArgumentError
from rnnkit.models.kernel import ActivationParams, ConvKernel, Scheme, as_image

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12

# receptive cell rates used by the single-cell construction when none are given
SINGLE_CELL_DEFAULTS = ActivationParams(lambda_plus=0.0, r=0.1)

ConvOutput = Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]


def conv2d(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """
    Valid-mode, stride-1 cross-correlation (the kernel is not flipped).

    Output shape is (H - h + 1, W - w + 1).
    """
    image = np.asarray(image, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    if image.ndim != 2 or kernel.ndim != 2:
        raise ArgumentError("conv2d expects 2-D image and kernel")
    if kernel.shape[0] > image.shape[0] or kernel.shape[1] > image.shape[1]:
        raise ArgumentError(f"kernel {kernel.shape} does not fit inside image {image.shape}")
    return correlate2d(image, kernel, mode="valid")


def prepare_kernel(W: np.ndarray, scheme: Union[Scheme, str]) -> ConvKernel:
    """
    Normalize a kernel for a scheme and split it into non-negative parts.

    single and twin: W / sum(|W|); cluster: W / sum(|W|) / 10, which keeps
    sum(W+) and sum(W-) at or below 0.1.
    """
    scheme = Scheme(scheme)
    W = np.asarray(W, dtype=float)
    if W.ndim != 2:
        raise ArgumentError("kernel must be a 2-D matrix")
    if not np.all(np.isfinite(W)):
        raise ArgumentError("kernel entries must be finite")
    total = np.abs(W).sum()
    if total == 0:
        raise ArgumentError("kernel is all zeros")
    W = W / total * scheme.target_abs_sum
    return ConvKernel(W=W, W_plus=np.maximum(W, 0.0), W_minus=np.maximum(-W, 0.0), scheme=scheme)


def _require(kernel: ConvKernel, scheme: Scheme) -> None:
    if not isinstance(kernel, ConvKernel):
        raise ArgumentError("kernel must be prepared with prepare_kernel")
    if kernel.scheme is not scheme:
        raise ArgumentError(f"kernel prepared for {kernel.scheme.value}, expected {scheme.value}")
    if scheme is Scheme.CLUSTER:
        # the approximation only needs both halves small
        if max(kernel.W_plus.sum(), kernel.W_minus.sum()) > scheme.target_abs_sum + NORMALIZATION_TOL:
            raise ArgumentError("cluster kernel halves must each sum to at most 0.1")
    elif abs(np.abs(kernel.W).sum() - scheme.target_abs_sum) > NORMALIZATION_TOL:
        raise ArgumentError(f"kernel is not normalized for the {scheme.value} scheme")


def _finish(output: np.ndarray, raw: np.ndarray, return_mask: bool) -> ConvOutput:
    if return_mask:
        return output, raw > 1.0
    return output


def conv_single(
    image: np.ndarray,
    kernel: ConvKernel,
    params: ActivationParams = SINGLE_CELL_DEFAULTS,
    swapped: bool = False,
    return_mask: bool = False,
) -> ConvOutput:
    """
    Single-cell RNN convolution: phi(conv(I, W+), conv(I, W-)) at the receptive cells.

    With ``swapped`` the roles of W+ and W- are exchanged. ``return_mask``
    also returns where the min(., 1) clamp was active.
    """
    _require(kernel, Scheme.SINGLE)
    image = as_image(image)
    exc = conv2d(image, kernel.W_plus)
    inh = conv2d(image, kernel.W_minus)
    if swapped:
        exc, inh = inh, exc
    raw = np.full_like(exc, np.inf)
    den = params.r + inh
    np.divide(params.lambda_plus + exc, den, out=raw, where=den > 0)
    return _finish(phi_cell(exc, inh, params), raw, return_mask)


@dataclass(frozen=True)
class TwinForms:
    """Both expressions of the twin-cell output plus the kernel actually used."""

    closed: np.ndarray
    constructive: np.ndarray
    kernel: ConvKernel
    within_bounds: bool


def twin_inputs(image: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Outputs of the twin arrays: I1 = 1 / (1 + I) and I2 = I / (1 + I)."""
    image = as_image(image)
    return 1.0 / (1.0 + image), image / (1.0 + image)


def conv_twin_forms(image: np.ndarray, kernel: ConvKernel) -> TwinForms:
    """
    Twin-cell RNN convolution in closed and constructive form.

    The kernel is first divided by max|conv(I1, W)| when that exceeds 1,
    then renormalized to sum(|W|) = 1. The bound is re-checked after both
    adjustments and reported in ``within_bounds``.
    """
    _require(kernel, Scheme.TWIN)
    i1, i2 = twin_inputs(image)
    W = kernel.W
    peak = np.abs(conv2d(i1, W)).max()
    if peak > 1.0:
        W = W / peak
    adjusted = prepare_kernel(W, Scheme.TWIN)
    conv_i1 = conv2d(i1, adjusted.W)
    within = bool(np.abs(conv_i1).max() <= 1.0 + NORMALIZATION_TOL)
    if not within:
        logger.warning("twin-cell kernel still exceeds the unit bound after normalization")

    closed = np.minimum(conv_i1 + 1.0, 1.0)
    constructive = np.minimum(
        conv2d(i1, adjusted.W_plus) + conv2d(i2, adjusted.W_minus) + 1.0 - adjusted.W_minus.sum(),
        1.0,
    )
    return TwinForms(closed=closed, constructive=constructive, kernel=adjusted, within_bounds=within)


def conv_twin(image: np.ndarray, kernel: ConvKernel, return_mask: bool = False) -> ConvOutput:
    """Twin-cell RNN convolution: min(conv(I1, W) + 1, 1)."""
    forms = conv_twin_forms(image, kernel)
    raw = conv2d(twin_inputs(image)[0], forms.kernel.W) + 1.0
    return _finish(forms.closed, raw, return_mask)


def conv_cluster(image: np.ndarray, kernel: ConvKernel, return_mask: bool = False) -> ConvOutput:
    """
    ReLU-cluster RNN convolution: varphi(conv(I, W+), conv(I, W-)).

    Approximates 1 - ReLU(conv(I, W)) with error at most sum(W+)^2.
    """
    _require(kernel, Scheme.CLUSTER)
    image = as_image(image)
    exc = conv2d(image, kernel.W_plus)
    inh = conv2d(image, kernel.W_minus)
    raw = 1.0 / (1.0 + exc) + inh
    return _finish(cluster_activation(exc, inh), raw, return_mask)


def conv_relu_reference(image: np.ndarray, W: np.ndarray) -> np.ndarray:
    """The image the cluster construction approximates: 1 - ReLU(conv(I, W))."""
    return 1.0 - np.maximum(conv2d(as_image(image), W), 0.0)
