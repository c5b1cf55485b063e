"""Helpers that turn results into template context and render text reports."""
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from rnnkit.models.network import SteadyState, ValidationReport
from rnnkit.models.simulation import AgreementReport

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

_env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)


def format_probability(value: float) -> str:
    """Probabilities print with ten decimals, enough to show solver tolerance."""
    return f"{value:.10f}"


def format_accuracy(value: float) -> str:
    return f"{value:.4f}"


_env.filters["prob"] = format_probability
_env.filters["acc"] = format_accuracy


def render(template: str, **context) -> str:
    return _env.get_template(template).render(**context)


def transform_steady_state(state: SteadyState, report: Optional[ValidationReport] = None) -> dict:
    return {
        "rows": [{"neuron": i, "q": float(q)} for i, q in enumerate(state.q)],
        "iterations": state.iterations,
        "residual": state.residual,
        "validation": str(report) if report is not None else None,
    }


def transform_agreement(report: AgreementReport) -> dict:
    sim = report.sim
    return {
        "rows": [
            {"neuron": i, "q": float(q), "q_hat": float(qh), "deviation": float(d)}
            for i, (q, qh, d) in enumerate(zip(report.q, report.q_hat, report.deviations))
        ],
        "max_deviation": report.max_deviation,
        "tol": report.tol,
        "passed": report.passed,
        "events": sim.event_counts,
        "fields": {
            "generator": sim.generator,
            "seed": sim.seed,
            "events": sum(sim.event_counts.values()),
            "model_time": f"{sim.model_time:.6g}",
            "measured_time": f"{sim.measured_time:.6g}",
            "max_deviation": f"{report.max_deviation:.6g}",
            "passed": str(report.passed).lower(),
        },
    }


def transform_confusion(matrix: np.ndarray, class_names: Sequence[str]) -> dict:
    names: List[str] = [str(name) for name in class_names]
    width = max([len(n) for n in names] + [len(str(int(matrix.max(initial=0))))] + [4])
    return {
        "names": names,
        "width": width,
        "rows": [{"name": name, "counts": [int(c) for c in row]} for name, row in zip(names, matrix)],
    }
