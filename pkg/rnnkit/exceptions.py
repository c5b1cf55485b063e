"""Exception types raised across rnnkit."""
from typing import Optional

import numpy as np


class RnnKitError(Exception):
    """Base class for every rnnkit failure."""

    kind = "rnnkit"


class ArgumentError(RnnKitError, ValueError):
    """An operation received arguments outside its domain."""

    kind = "argument"


class ConvergenceError(RnnKitError):
    """The fixed-point iteration did not reach the requested tolerance."""

    kind = "convergence"

    def __init__(self, message: str, last_iterate: np.ndarray, residual: float, iterations: int):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class DegenerateProcessError(RnnKitError):
    """The jump process has no event with a positive rate."""

    kind = "degenerate-process"


class FistaDivergenceError(RnnKitError):
    """A FISTA iterate became non-finite."""

    kind = "fista-divergence"

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class TrainingError(RnnKitError):
    """Training hit a degenerate layer encoding."""

    kind = "training"

    def __init__(self, message: str, layer: int):
        super().__init__(message)
        self.layer = layer


class DataFormatError(RnnKitError):
    """An input file could not be parsed."""

    kind = "parse"

    def __init__(
        self,
        message: str,
        source: str = "",
        line: Optional[int] = None,
        offset: Optional[int] = None,
    ):
        where = source
        if line is not None:
            where = f"{source}:{line}"
        elif offset is not None:
            where = f"{source}@{offset}"
        super().__init__(f"{where}: {message}" if where else message)
        self.source = source
        self.line = line
        self.offset = offset


class ModelFileError(RnnKitError):
    """A model file failed one of its load checks."""

    kind = "model-file"

    def __init__(self, message: str, check: str):
        super().__init__(f"{check}: {message}")
        self.check = check
