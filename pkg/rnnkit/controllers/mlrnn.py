"""Gradient-free training and inference for the multi-layer RNN classifier."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from rnnkit.controllers.cells import layer_activation
from rnnkit.controllers.numeric import pinv, run_fista, sigma_transform
from rnnkit.exceptions import ArgumentError, TrainingError
from rnnkit.models.mlrnn import ChannelEncoder, LabeledDataset, MlrnnModel, NormalizationStats, TrainConfig
from rnnkit.models.network import RnnNetwork, ValidationReport, Violation, check_rows
from rnnkit.models.numeric import NnlsProblem

logger = logging.getLogger(__name__)


def _check_input(model: MlrnnModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.input_width:
        raise ArgumentError(f"expected {model.input_width} attributes, got shape {X.shape}")
    if not np.all(np.isfinite(X)) or np.any(X < 0):
        raise ArgumentError("inputs must be finite and non-negative")
    return X


def _channel_slices(widths: Sequence[int]) -> List[slice]:
    bounds = np.concatenate([[0], np.cumsum(widths)]).astype(int)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _inhibited(x_minus: np.ndarray, rate: float) -> np.ndarray:
    """Cells with Lambda+ = r = rate driven only by inhibition."""
    return layer_activation(0.0, x_minus, rate, rate)


def encode(model: MlrnnModel, X: np.ndarray) -> np.ndarray:
    """Excitation probabilities of layer L (the input of the SLANN stage)."""
    X = _check_input(model, X)
    Q1 = np.minimum(X, 1.0)
    parts = []
    for channel, cols in zip(model.channels, _channel_slices([c.input_width for c in model.channels])):
        Q = Q1[:, cols]
        for W, rate in zip(channel.inhibitory_weights, channel.rates):
            Q = _inhibited(Q @ W, rate)
        parts.append(Q)
    return np.hstack(parts)


def hidden_excitation(model: MlrnnModel, X: np.ndarray) -> np.ndarray:
    """Excitation probabilities of layer L+1."""
    Q_L = encode(model, X)
    return layer_activation(Q_L @ model.W_plus_L, Q_L @ model.W_minus_L, model.hidden_lambda, model.hidden_rate)


def forward(model: MlrnnModel, X: np.ndarray) -> np.ndarray:
    """
    Output-layer excitation probabilities, one row per instance.

    The output cells are quasi-linear: min(lambda + Q_{L+1} W+_{L+1}, 1).
    """
    Q_hidden = hidden_excitation(model, X)
    return np.minimum(model.output_lambda + Q_hidden @ model.W_plus_readout, 1.0)


def slann_forward(W1_bar: np.ndarray, W2_bar: np.ndarray, alpha: float, X_L: np.ndarray) -> np.ndarray:
    """Single-hidden-layer readout alpha / (alpha + X_L W1_bar) @ W2_bar."""
    if not alpha > 0:
        raise ArgumentError("alpha must be positive")
    W1_bar = np.asarray(W1_bar, dtype=float)
    if np.any(W1_bar < 0):
        raise ArgumentError("W1_bar must be non-negative")
    Z = np.asarray(X_L, dtype=float) @ W1_bar
    return (alpha / (alpha + Z)) @ np.asarray(W2_bar, dtype=float)


def predict(model: MlrnnModel, X: np.ndarray) -> np.ndarray:
    """Index of the most excited output cell per row; ties go to the lowest index."""
    return np.argmax(forward(model, X), axis=1)


def accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if predicted.shape != labels.shape:
        raise ArgumentError("prediction and label vectors differ in length")
    if predicted.size == 0:
        return 0.0
    return float(np.mean(predicted == labels))


def confusion_matrix(labels: np.ndarray, predicted: np.ndarray, n_classes: int) -> np.ndarray:
    """Counts with rows indexed by the true class and columns by the prediction."""
    matrix = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(matrix, (np.asarray(labels, dtype=int), np.asarray(predicted, dtype=int)), 1)
    return matrix


def _scale_rows(W: np.ndarray, limit: np.ndarray) -> np.ndarray:
    """Scale each row so it sums to ``limit``."""
    sums = W.sum(axis=1)
    factor = np.divide(limit, sums, out=np.zeros_like(sums), where=sums > 0)
    return W * factor[:, None]


def cap_row_sums(W: np.ndarray, limit: float) -> np.ndarray:
    """Scale down only the rows whose sum exceeds ``limit``, each onto the limit."""
    sums = W.sum(axis=1)
    return W / np.maximum(sums / limit, 1.0)[:, None]


def _reconstruction_layer(
    X_l: np.ndarray,
    width: int,
    r_l: float,
    cfg: TrainConfig,
    rng: np.random.Generator,
    layer: int,
    channel: int,
) -> Optional[Tuple[np.ndarray, float, np.ndarray]]:
    """
    Configure one inhibitory layer by reconstructing its input.

    Returns (W-, rate, X_{l+1}), or None when the input carries no signal.
    """
    W_rand = _scale_rows(rng.uniform(0.0, 1.0, size=(X_l.shape[1], width)), np.full(X_l.shape[1], r_l))
    Z = X_l @ W_rand
    peak = Z.max()
    if not peak > 0:
        return None
    H = _inhibited(Z, peak)
    result = run_fista(NnlsProblem(A=sigma_transform(H), B=X_l, reg=cfg.reg), cfg.fista)
    W_minus = result.W.T
    W_minus = cap_row_sums(W_minus, r_l)
    drive = X_l @ W_minus
    if not drive.max() > 0:
        return None
    rate = float(drive.max() / cfg.rate_divisor)
    logger.info(
        "channel %d layer %d: reconstruction objective %.6g, rate %.6g",
        channel, layer, result.objective, rate,
    )
    return W_minus, rate, _inhibited(drive, rate)


def _encode_channel(
    X: np.ndarray,
    widths: Sequence[int],
    cfg: TrainConfig,
    rng: np.random.Generator,
    channel: int,
) -> Tuple[ChannelEncoder, np.ndarray, bool]:
    """Step 2 for one channel; the flag reports whether any layer was degenerate."""
    weights, rates = [], []
    X_l, r_l = X, 1.0
    degenerate = False
    for layer, width in enumerate(widths, start=1):
        outcome = None if degenerate else _reconstruction_layer(X_l, width, r_l, cfg, rng, layer, channel)
        if outcome is None:
            # a silent layer: zero weights and every downstream cell fires at its own rate
            if not degenerate:
                logger.warning("channel %d layer %d has an all-zero encoding", channel, layer)
            degenerate = True
            W_minus, rate = np.zeros((X_l.shape[1], width)), 1.0
            X_next = np.ones((X_l.shape[0], width))
        else:
            W_minus, rate, X_next = outcome
        weights.append(W_minus)
        rates.append(rate)
        X_l, r_l = X_next, rate
    encoder = ChannelEncoder(input_width=X.shape[1], inhibitory_weights=tuple(weights), rates=tuple(rates))
    return encoder, X_l, degenerate


def train_multichannel(
    channels: Sequence[np.ndarray],
    Y: np.ndarray,
    cfg: TrainConfig = TrainConfig(),
    class_names: Sequence[str] = (),
    normalization: Optional[NormalizationStats] = None,
) -> MlrnnModel:
    """
    Train an MLRNN whose input attributes are split into channels.

    Step 2 runs independently for each channel (private inhibitory layers
    and rates); the channel encodings are concatenated at layer L and the
    SLANN stage of Step 3 is shared.

    Args:
        channels: One D x N1_c matrix per channel, values in [0, 1]
        Y: D x N_out target matrix
        cfg: Training settings
        class_names: Names of the output columns
        normalization: Input statistics to store with the model

    Returns:
        The trained model

    Raises:
        ArgumentError: inconsistent shapes, odd N_{L+1} or fewer than two instances
        TrainingError: every channel yields an all-zero encoding at some layer
    """
    if len(channels) < 1:
        raise ArgumentError("at least one channel is required")
    data = LabeledDataset(np.hstack([np.asarray(c, dtype=float) for c in channels]), Y, tuple(class_names))
    widths = [np.asarray(c).shape[1] for c in channels]
    if any(np.asarray(c).shape[0] != len(data) for c in channels):
        raise ArgumentError("all channels must hold the same number of instances")
    if len(data) < 2:
        raise ArgumentError("training needs at least two instances")
    *encoding_sizes, n_hidden = cfg.hidden_layer_sizes
    if n_hidden % 2:
        raise ArgumentError(f"last hidden layer size must be even, got {n_hidden}")
    h = n_hidden // 2
    depth = len(cfg.hidden_layer_sizes)
    rng = np.random.default_rng(cfg.seed)

    # Step 2
    X1 = np.minimum(data.X, 1.0)
    encoders, encodings, flags = [], [], []
    for index, cols in enumerate(_channel_slices(widths)):
        encoder, X_L_c, degenerate = _encode_channel(X1[:, cols], encoding_sizes, cfg, rng, index)
        encoders.append(encoder)
        encodings.append(X_L_c)
        flags.append(degenerate)
    if encoding_sizes and all(flags):
        layer = min(
            next(i for i, w in enumerate(e.inhibitory_weights, start=1) if not np.any(w))
            for e in encoders
        )
        raise TrainingError(f"layer {layer} encoding is all zeros", layer=layer)
    X_L = np.hstack(encodings)
    r_L = np.concatenate([np.full(e.output_width, e.output_rate) for e in encoders])

    # Step 3
    W1_bar = _scale_rows(rng.uniform(0.0, 1.0, size=(X_L.shape[1], h)), cfg.slann_weight_scale * r_L / 3.0)
    Z = X_L @ W1_bar
    if not Z.max() > 0:
        raise TrainingError(f"layer {depth} encoding is all zeros", layer=depth)
    alpha = float(Z.max() / cfg.rate_divisor)
    H = alpha / (alpha + Z)
    W2_bar = pinv(H) @ data.Y
    total = np.abs(W2_bar).sum()
    if not total > 0:
        raise TrainingError("readout weights vanished", layer=depth + 1)
    W2_bar = W2_bar / total
    W2_plus, W2_minus = np.maximum(W2_bar, 0.0), np.maximum(-W2_bar, 0.0)
    heaviest = max(W2_plus.sum(axis=1).max(), W2_minus.sum(axis=1).max())
    if heaviest > alpha:
        shrink = alpha / heaviest
        W2_plus, W2_minus = W2_plus * shrink, W2_minus * shrink
    offset = float(W2_minus.sum(axis=0).max())
    logger.info("slann stage: alpha %.6g, offset %.6g, hidden width %d", alpha, offset, n_hidden)

    layer_sizes = (
        data.X.shape[1],
        *(sum(e.inhibitory_weights[k].shape[1] for e in encoders) for k in range(len(encoding_sizes))),
        n_hidden,
        data.Y.shape[1],
    )
    return MlrnnModel(
        layer_sizes=tuple(int(n) for n in layer_sizes),
        channels=tuple(encoders),
        W_plus_L=np.hstack([np.zeros_like(W1_bar), W1_bar]),
        W_minus_L=np.hstack([W1_bar, W1_bar]),
        W_plus_readout=np.vstack([W2_plus, W2_minus]),
        alpha=alpha,
        output_lambda=offset - W2_minus.sum(axis=0),
        offset=offset,
        class_names=data.class_names,
        normalization=normalization,
    )


def train(data: LabeledDataset, cfg: TrainConfig = TrainConfig(), normalization: Optional[NormalizationStats] = None) -> MlrnnModel:
    """Train a single-channel MLRNN; see train_multichannel."""
    return train_multichannel([data.X], data.Y, cfg, data.class_names, normalization)


def audit_model(model: MlrnnModel) -> ValidationReport:
    """
    Check every layer of a model against the RNN constraints.

    Neurons are numbered globally: input cells first, then each hidden layer
    and finally the output cells.
    """
    violations: List[Violation] = []
    offset = 0
    layer_starts = []
    # inhibitory layers are channel-private; number them channel by channel within each layer
    for k in range(model.depth - 1):
        layer_starts.append(offset)
        for channel in model.channels:
            r = 1.0 if k == 0 else channel.rates[k - 1]
            W = channel.inhibitory_weights[k]
            violations += check_rows(np.zeros_like(W), W, np.full(W.shape[0], r), offset)
            offset += W.shape[0]
    violations += check_rows(model.W_plus_L, model.W_minus_L, model.layer_L_rates, offset)
    offset += model.W_plus_L.shape[0]
    violations += check_rows(
        model.W_plus_readout, np.zeros_like(model.W_plus_readout), model.hidden_rate, offset
    )
    offset += model.W_plus_readout.shape[0]
    if not (np.isfinite(model.alpha) and model.alpha > 0):
        violations.append(Violation(offset, "negative", f"alpha {model.alpha:g} is not positive"))
    bad = np.flatnonzero(~np.isfinite(model.output_lambda) | (model.output_lambda < 0))
    violations += [Violation(offset + int(i), "negative", "negative output rate") for i in bad]
    return ValidationReport(sorted(violations, key=lambda v: v.neuron))


def model_to_network(model: MlrnnModel, x: np.ndarray) -> RnnNetwork:
    """
    Flatten a model fed with one instance into a single feed-forward network.

    Its steady state equals forward(model, x) at the last N_out neurons.
    """
    x = _check_input(model, x)[0]
    sizes = [model.input_width]
    sizes += [sum(c.inhibitory_weights[k].shape[1] for c in model.channels) for k in range(model.depth - 1)]
    sizes += [model.W_plus_readout.shape[0], model.W_plus_readout.shape[1]]
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    size = int(starts[-1])
    W_plus = np.zeros((size, size))
    W_minus = np.zeros((size, size))
    r = np.ones(size)
    Lambda_plus = np.zeros(size)
    Lambda_plus[: sizes[0]] = x

    # channel blocks of the inhibitory layers
    for k in range(model.depth - 1):
        row, col = int(starts[k]), int(starts[k + 1])
        for channel in model.channels:
            W = channel.inhibitory_weights[k]
            W_minus[row:row + W.shape[0], col:col + W.shape[1]] = W
            r[col:col + W.shape[1]] = channel.rates[k]
            Lambda_plus[col:col + W.shape[1]] = channel.rates[k]
            row += W.shape[0]
            col += W.shape[1]

    L_start, hidden_start, out_start = int(starts[-4]), int(starts[-3]), int(starts[-2])
    W_plus[L_start:hidden_start, hidden_start:out_start] = model.W_plus_L
    W_minus[L_start:hidden_start, hidden_start:out_start] = model.W_minus_L
    r[hidden_start:out_start] = model.hidden_rate
    Lambda_plus[hidden_start:out_start] = model.hidden_lambda
    W_plus[hidden_start:out_start, out_start:] = model.W_plus_readout
    Lambda_plus[out_start:] = model.output_lambda
    return RnnNetwork(
        W_plus=W_plus,
        W_minus=W_minus,
        r=r,
        Lambda_plus=Lambda_plus,
        lambda_minus=np.zeros(size),
    )
