"""Command line: render one figure from a set of bench CSV traces."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figure import FigureSpec, plot_figure
from .reader import TraceFormatError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plots",
                                description="Plot bench convergence traces")
    p.add_argument("--inputs", nargs="+", required=True, type=Path,
                   help="bench CSV trace files (same problem kind)")
    p.add_argument("--out", required=True, type=Path,
                   help="output figure (.svg or .png)")
    p.add_argument("--metric", choices=("residual", "gap"), default=None,
                   help="y-axis metric; default comes from the manifests")
    p.add_argument("--title", default="")
    p.add_argument("--linear", action="store_true",
                   help="disable the default log-scaled y axis")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(inputs=args.inputs, out_path=args.out, title=args.title,
                      metric=args.metric, log_scale=not args.linear)
    try:
        plot_figure(spec)
    except TraceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
