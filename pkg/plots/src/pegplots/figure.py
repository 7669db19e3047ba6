"""Figure assembly: one labeled convergence curve per input trace."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")  # headless; must precede pyplot
import matplotlib.pyplot as plt
import numpy as np

from .reader import TraceData, TraceFormatError, read_trace

MAX_POINTS = 2000

_YLABELS = {"residual": "natural residual", "gap": "primal-dual gap"}

# deterministic output: fixed hash salt, text kept as text
matplotlib.rcParams["svg.hashsalt"] = "pegplots"
matplotlib.rcParams["svg.fonttype"] = "none"


@dataclass
class FigureSpec:
    inputs: Sequence[Path]
    out_path: Path
    title: str = ""
    metric: Optional[str] = None  # None: take it from the manifests
    log_scale: bool = True

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def downsample(n: int, limit: int = MAX_POINTS) -> np.ndarray:
    """Indices of at most ``limit`` points, always keeping the endpoints."""
    if n <= limit:
        return np.arange(n)
    idx = np.linspace(0, n - 1, limit).round().astype(int)
    return np.unique(idx)


def _resolve_metric(spec: FigureSpec, traces: list[TraceData]) -> str:
    if spec.metric is not None:
        return spec.metric
    metrics = {t.metric for t in traces}
    if len(metrics) > 1:
        raise TraceFormatError(
            "inputs disagree on the metric; pass --metric explicitly")
    return metrics.pop()


def plot_figure(spec: FigureSpec) -> Path:
    """Render the figure described by ``spec`` and return the output path.

    All inputs must come from the same problem kind; each contributes one
    curve labeled with its algorithm id, downsampled to at most 2000
    points.
    """
    traces = [read_trace(p) for p in spec.inputs]
    kinds = {t.problem for t in traces}
    if len(kinds) > 1:
        raise TraceFormatError(
            f"inputs mix problem kinds {sorted(kinds)}; one figure per problem")
    metric = _resolve_metric(spec, traces)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for t in traces:
        its = t.columns["iter"]
        vals = t.columns["residual"]
        keep = downsample(len(its))
        ax.plot(its[keep], vals[keep], label=t.algorithm, linewidth=1.2)
    if spec.log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel(_YLABELS.get(metric, metric))
    if spec.title:
        ax.set_title(spec.title)
    elif traces:
        ax.set_title(traces[0].problem)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".svg":
        fig.savefig(out, metadata={"Date": None})  # drop the timestamp
    else:
        fig.savefig(out)
    plt.close(fig)
    return out
