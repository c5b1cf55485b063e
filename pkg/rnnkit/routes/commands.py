"""Command-line routes: solve, simulate, conv-demo, train, predict and eval."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from rnnkit.controllers.convolution import (
    conv_cluster,
    conv_relu_reference,
    conv_single,
    conv_twin,
    conv_twin_forms,
    prepare_kernel,
)
from rnnkit.controllers.mlrnn import accuracy, confusion_matrix, predict, train_multichannel
from rnnkit.controllers.spike_sim import compare_to_analytic
from rnnkit.controllers.steady_state import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_steady_state, validate_network
from rnnkit.exceptions import ArgumentError, DataFormatError, RnnKitError
from rnnkit.models.dataset import DatasetSource
from rnnkit.models.kernel import ActivationParams
from rnnkit.models.mlrnn import LabeledDataset, NormalizationStats
from rnnkit.models.simulation import SimConfig
from rnnkit.routes.router import CommandRouter, arg
from rnnkit.utils.data_loader import RawTable, align_classes, read_table, split_rows
from rnnkit.utils.display import render, transform_agreement, transform_confusion, transform_steady_state
from rnnkit.utils.logging_setup import configure_logging
from rnnkit.utils.model_io import load_model, save_model
from rnnkit.utils.pgm import read_pgm, write_pgm
from rnnkit.utils.text_formats import build_train_config, parse_sizes, read_kernel, read_network, read_train_config

logger = logging.getLogger(__name__)

router = CommandRouter("rnnkit", "Random neural network toolkit.")
router.shared.append(
    arg("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default: $RNNKIT_LOG_LEVEL or WARNING)")
)

DATASET_ARGS = [
    arg("data", type=Path, help="CSV file, or IDX image file"),
    arg("--labels", type=Path, default=None, help="IDX label file (selects IDX input)"),
    arg("--label-column", default="-1", help="CSV label column name or index (default: last)"),
]


def _source(args: argparse.Namespace, labeled: bool = True, normalization: str = "none") -> DatasetSource:
    if args.labels is not None or _is_idx(args.data):
        paths = (args.data,) if args.labels is None else (args.data, args.labels)
        return DatasetSource.build(format="idx", paths=paths, normalization=normalization)
    return DatasetSource.build(
        format="csv",
        paths=(args.data,),
        label_column=args.label_column if labeled else None,
        normalization=normalization,
    )


def _is_idx(path: Path) -> bool:
    return "idx" in path.name or path.suffix == ".gz"


def _emit(text: str) -> None:
    sys.stdout.write(text)


@router.command(
    "solve",
    "Solve a network file for its stationary excitation probabilities.",
    [
        arg("network", type=Path),
        arg("--tol", type=float, default=DEFAULT_TOL),
        arg("--max-iter", type=int, default=DEFAULT_MAX_ITER),
    ],
)
def solve(args: argparse.Namespace) -> int:
    net = read_network(args.network)
    report = validate_network(net)
    if not report.passed:
        raise DataFormatError(f"network violates the RNN constraints: {report}", str(args.network))
    state = solve_steady_state(net, tol=args.tol, max_iter=args.max_iter)
    _emit(render("steady_state.txt.j2", **transform_steady_state(state, report)))
    return 0


@router.command(
    "simulate",
    "Simulate the spiking dynamics of a network and compare with the analytic solution.",
    [
        arg("network", type=Path),
        arg("--events", type=int, default=1_000_000),
        arg("--seed", type=int, default=0),
        arg("--burn-in", type=float, default=0.1, help="fraction of model time discarded"),
        arg("--tol", type=float, default=0.02, help="agreement tolerance in max-norm"),
    ],
)
def simulate(args: argparse.Namespace) -> int:
    net = read_network(args.network)
    report = validate_network(net)
    if not report.passed:
        raise DataFormatError(f"network violates the RNN constraints: {report}", str(args.network))
    cfg = SimConfig.build(total_events=args.events, seed=args.seed, burn_in_fraction=args.burn_in)
    agreement = compare_to_analytic(net, cfg, tol=args.tol)
    _emit(render("simulation.txt.j2", **transform_agreement(agreement)))
    return 0


@router.command(
    "conv-demo",
    "Convolve a PGM image with an RNN cell construction and write the result as PGM.",
    [
        arg("image", type=Path),
        arg("kernel", type=Path),
        arg("--scheme", choices=("single", "twin", "cluster", "relu"), default="single"),
        arg("--output", type=Path, required=True),
        arg("--lambda-plus", type=float, default=0.0, help="single-cell external excitatory rate"),
        arg("--r", type=float, default=0.1, help="single-cell firing rate"),
        arg("--swapped", action="store_true", help="exchange W+ and W- (single scheme)"),
    ],
)
def conv_demo(args: argparse.Namespace) -> int:
    image = read_pgm(args.image)
    W = read_kernel(args.kernel)
    within_bounds = None
    mask = None
    if args.scheme == "single":
        params = ActivationParams.build(lambda_plus=args.lambda_plus, r=args.r)
        output, mask = conv_single(image, prepare_kernel(W, "single"), params, args.swapped, return_mask=True)
    elif args.scheme == "twin":
        kernel = prepare_kernel(W, "twin")
        within_bounds = conv_twin_forms(image, kernel).within_bounds
        output, mask = conv_twin(image, kernel, return_mask=True)
    elif args.scheme == "cluster":
        output, mask = conv_cluster(image, prepare_kernel(W, "cluster"), return_mask=True)
    else:
        output = conv_relu_reference(image, prepare_kernel(W, "cluster").W)
    lo, hi = write_pgm(args.output, output)
    _emit(
        render(
            "conv_demo.txt.j2",
            scheme=args.scheme,
            output=args.output,
            height=output.shape[0],
            width=output.shape[1],
            lo=lo,
            hi=hi,
            clamped=None if mask is None else int(np.count_nonzero(mask)),
            within_bounds=None if within_bounds is None else str(within_bounds),
        )
    )
    return 0


def _split_channels(X: np.ndarray, count: int) -> List[np.ndarray]:
    if count < 1 or X.shape[1] % count:
        raise ArgumentError(f"{X.shape[1]} attributes cannot be split into {count} equal channels")
    return np.hsplit(X, count)


def _accuracy_row(name: str, predicted: np.ndarray, labels: np.ndarray) -> dict:
    return {
        "name": name,
        "accuracy": accuracy(predicted, labels),
        "correct": int(np.sum(predicted == labels)),
        "total": int(labels.shape[0]),
    }


@router.command(
    "train",
    "Train an MLRNN classifier and write it as a model file.",
    DATASET_ARGS
    + [
        arg("--output", type=Path, required=True, help="model file to write"),
        arg("--config", type=Path, default=None, help="key = value training config"),
        arg("--seed", type=int, default=None),
        arg("--hidden", default=None, help="comma-separated hidden layer sizes, e.g. 100,200"),
        arg("--test-fraction", type=float, default=None),
        arg("--test-data", type=Path, default=None, help="held-out CSV (or IDX images with --test-labels)"),
        arg("--test-labels", type=Path, default=None),
        arg("--channels", type=int, default=1, help="split attributes into this many equal channels"),
        arg("--no-normalize", action="store_true", help="use attributes as read (they must lie in [0, 1])"),
    ],
)
def train_command(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed, "test_fraction": args.test_fraction}
    if args.hidden is not None:
        overrides["hidden_layer_sizes"] = parse_sizes(args.hidden)
    if args.config is not None:
        cfg = read_train_config(args.config, **overrides)
    else:
        cfg = build_train_config({}, **overrides)

    table = read_table(_source(args))
    if args.test_data is not None:
        train_rows, test_rows = np.arange(len(table)), None
        test_args = argparse.Namespace(data=args.test_data, labels=args.test_labels, label_column=args.label_column)
        test_table: Optional[RawTable] = align_classes(read_table(_source(test_args)), table.class_names)
    else:
        train_rows, test_rows = split_rows(len(table), cfg.test_fraction, cfg.seed)
        test_table = table if test_rows.size else None
    if len(train_rows) == 0:
        raise ArgumentError(f"no training rows left after holding out test_fraction={cfg.test_fraction} of {len(table)}")

    stats = None if args.no_normalize else NormalizationStats.fit(table.X[train_rows])
    train_set = table.to_dataset(train_rows, stats)
    model = train_multichannel(
        _split_channels(train_set.X, args.channels),
        train_set.Y,
        cfg,
        class_names=train_set.class_names,
        normalization=stats,
    )
    save_model(model, args.output)

    splits = [_accuracy_row("train", predict(model, train_set.X), train_set.labels)]
    if test_table is not None:
        test_set = test_table.to_dataset(test_rows, stats)
        splits.append(_accuracy_row("test", predict(model, test_set.X), test_set.labels))
    _emit(render("accuracy.txt.j2", splits=splits, model_path=args.output))
    return 0


def _model_inputs(model, table: RawTable) -> np.ndarray:
    if table.X.shape[1] != model.input_width:
        raise ArgumentError(f"model expects {model.input_width} attributes, data has {table.X.shape[1]}")
    if model.normalization is not None:
        return model.normalization.apply(table.X)
    return table.X


@router.command(
    "predict",
    "Print the predicted class of every instance, one per line.",
    [arg("model", type=Path)] + DATASET_ARGS + [arg("--unlabeled", action="store_true", help="CSV has no label column")],
)
def predict_command(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    table = read_table(_source(args, labeled=not args.unlabeled))
    if table.class_names and not args.unlabeled:
        # labels are ignored but must still be known classes
        align_classes(table, model.class_names)
    labels = predict(model, _model_inputs(model, table))
    _emit(render("predictions.txt.j2", labels=[model.class_names[i] for i in labels]))
    return 0


@router.command(
    "eval",
    "Report accuracy and the confusion matrix of a model on a labeled dataset.",
    [arg("model", type=Path)] + DATASET_ARGS,
)
def eval_command(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    table = align_classes(read_table(_source(args)), model.class_names)
    data = LabeledDataset(_model_inputs(model, table), table.Y, table.class_names)
    predicted = predict(model, data.X)
    row = _accuracy_row("eval", predicted, data.labels)
    matrix = confusion_matrix(data.labels, predicted, len(model.class_names))
    _emit(render("confusion.txt.j2", accuracy=row["accuracy"], correct=row["correct"], total=row["total"],
                 **transform_confusion(matrix, model.class_names)))
    return 0


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns 0 on success, 1 for usage and argument errors and 2 for data,
    convergence and training failures. Failures print a single
    ``error[<kind>]: <message>`` line to stderr.
    """
    try:
        args = router.parse(argv)
        configure_logging(getattr(args, "log_level", None))
        return args.handler(args)
    except ArgumentError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return 1
    except RnnKitError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return 2
