"""Benchmark harness: run problem/algorithm pairs, emit CSV traces and a
summary table with the per-problem counter columns.

CSV files carry a ``# key=value`` manifest header (enough to reproduce the
run bit-exactly), then the fixed column header and one row per iteration.
The per-row ``elapsed_s`` field is zeroed on output so that repeated runs
produce byte-identical bodies; total wall time lives in the ``wall_time_s``
manifest entry and in the summary table.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional


from . import __version__
from .baselines import BacktrackConfig, PDConfig, cp_pd_solve, fbf_solve, \
    fista_solve, pgm_solve, spectral_norm
from .core import Counters, SolverConfig
from .metrics import matrix_game_gap, natural_residual
from .problems import MAKERS, ProblemInstance
from .solvers import (IterationTrace, LinesearchError, SolveReport,
                      alg1_solve, alg2_solve, alg3_solve)

CSV_HEADER = "iter,residual,lambda,tau,ls_inner,n_F,n_f,n_prox,n_mult,elapsed_s"

PROBLEM_ALIASES = {
    "cons_min": "cons_min",
    "geo": "geo_prog",
    "geo_prog": "geo_prog",
    "ac": "analytic_center",
    "analytic_center": "analytic_center",
    "lp": "lp_min",
    "lp_min": "lp_min",
    "sun": "sun_vi",
    "sun_vi": "sun_vi",
    "matrix_game": "matrix_game",
}

ALL_ALGS = ("alg1", "alg2", "alg3", "pgm", "fista", "fbf1", "fbf2", "pd")
COMPOSITE_ONLY = {"alg3", "pgm", "fista"}
GAME_ONLY = {"pd"}
COMPOSITE_KINDS = {"cons_min", "geo_prog", "analytic_center", "lp_min"}


def default_config(alg: str):
    """Benchmark parameter sets, one per algorithm id."""
    if alg in ("alg1", "alg2"):
        return SolverConfig(alpha=0.41, sigma=0.7)
    if alg == "alg3":
        return SolverConfig(alpha=0.41, sigma=0.7, theta=2.0)
    if alg in ("pgm", "fista"):
        return BacktrackConfig(beta=0.7, lambda_init=1.0)
    if alg in ("fbf1", "fbf2"):
        return BacktrackConfig(beta=0.7, theta_fbf=0.9,
                               delta=1.0 if alg == "fbf1" else 2.0)
    if alg == "pd":
        return PDConfig(tau_pd=1.0, sigma_pd=1.0)  # rescaled by 1/||A|| at run time
    raise KeyError(f"unknown algorithm id {alg!r}")


def _format_float(v: float) -> str:
    return format(float(v), ".17g")


def trace_to_csv_lines(trace: list[IterationTrace]) -> list[str]:
    lines = [CSV_HEADER]
    for t in trace:
        lines.append(",".join([
            str(t.iter), _format_float(t.residual), _format_float(t.lam),
            _format_float(t.tau), str(t.ls_inner), str(t.n_F), str(t.n_f),
            str(t.n_prox), str(t.n_mult), _format_float(t.elapsed_s),
        ]))
    return lines


def write_trace_csv(path: Path, manifest: dict, trace: list[IterationTrace]) -> None:
    lines = [f"# {k}={v}" for k, v in manifest.items()]
    lines.extend(trace_to_csv_lines(trace))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_trace_csv(path: Path) -> tuple[dict, list[IterationTrace]]:
    manifest: dict = {}
    rows: list[IterationTrace] = []
    header_seen = False
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            manifest[key] = value
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise ValueError(f"unexpected CSV header in {path}")
            header_seen = True
            continue
        f = line.split(",")
        if len(f) != 10:
            raise ValueError(f"malformed CSV row in {path}")
        rows.append(IterationTrace(int(f[0]), float(f[1]), float(f[2]),
                                   float(f[3]), int(f[4]), int(f[5]),
                                   int(f[6]), int(f[7]), int(f[8]),
                                   float(f[9])))
    if not header_seen:
        raise ValueError(f"missing CSV header in {path}")
    return manifest, rows


def _bench_diagnostic(instance: ProblemInstance, shadow: Counters):
    """Per-iteration convergence metric: natural residual, or the
    primal-dual gap for the game (at the feasible auxiliary point when the
    solver provides one, as FBF does)."""
    if instance.metric == "gap":
        A = instance.data["A"]
        l = instance.params["l"]

        def diag(x, aux=None):
            z = aux if aux is not None else x
            shadow.n_mult += 2
            return matrix_game_gap(A, z[:l], z[l:]).value
        return diag

    vi = instance.vi

    def diag(x, aux=None):
        return natural_residual(x, vi, 1.0, counters=shadow)
    return diag


def run_algorithm(instance: ProblemInstance, alg: str, iters: int,
                  tol: float = 0.0, overrides: Optional[dict] = None,
                  iterate_hook=None) -> SolveReport:
    """Run one (problem, algorithm) pair and return its report.

    The fully resolved configuration (including run-time derived values
    such as the primal-dual stepsizes) is attached to the report as
    ``report.config`` so manifests record exactly what ran.
    """
    overrides = overrides or {}
    cfg = default_config(alg)
    for key, value in overrides.items():
        if value is not None and hasattr(cfg, key):
            cfg = replace(cfg, **{key: value})
    composite = instance.composite
    if alg in COMPOSITE_ONLY and composite is None:
        raise ValueError(f"{alg} needs a composite (optimization) problem, "
                         f"got {instance.kind}")
    if alg in GAME_ONLY and instance.kind != "matrix_game":
        raise ValueError(f"{alg} only applies to the matrix game")

    report: SolveReport
    if alg in ("alg1", "alg2", "alg3"):
        # the stepsize probe draws from the instance seed
        cfg = replace(cfg, max_iter=iters, tol=tol, seed=instance.rng.seed)
        shadow = Counters()
        diag = _bench_diagnostic(instance, shadow)
        if alg == "alg1":
            report = alg1_solve(instance.vi, cfg, instance.x0, diagnostic=diag,
                                iterate_hook=iterate_hook)
        elif alg == "alg2":
            report = alg2_solve(instance.vi, cfg, instance.x0, diagnostic=diag,
                                iterate_hook=iterate_hook)
        else:
            report = alg3_solve(composite, cfg, instance.x0, diagnostic=diag,
                                iterate_hook=iterate_hook)
        report.shadow = shadow
    elif alg in ("pgm", "fista"):
        shadow = Counters()
        diag = _bench_diagnostic(instance, shadow)
        solve = pgm_solve if alg == "pgm" else fista_solve
        report = solve(composite, cfg, instance.x0, iters, tol, diagnostic=diag)
        report.shadow = shadow
    elif alg in ("fbf1", "fbf2"):
        shadow = Counters()
        diag = _bench_diagnostic(instance, shadow)
        report = fbf_solve(instance.vi, cfg, instance.x0, iters, tol,
                           diagnostic=diag)
        report.shadow = shadow
    else:  # pd
        A = instance.data["A"]
        nrm = spectral_norm(A)
        cfg = PDConfig(tau_pd=1.0 / nrm, sigma_pd=1.0 / nrm)
        l = instance.params["l"]
        report = cp_pd_solve(A, instance.x0[:l], instance.x0[l:], cfg, iters, tol)
    report.algorithm = alg
    report.config = cfg
    return report


def build_manifest(instance: ProblemInstance, alg: str, iters: int, tol: float,
                   report: SolveReport) -> dict:
    """Header key/value pairs: problem descriptor, the exact configuration
    the run used, budgets and timing.  The problem ``seed`` key is the data
    seed; the solver's probe seed appears as ``probe_seed``."""
    manifest = {"problem": instance.kind}
    manifest.update({k: v for k, v in sorted(instance.descriptor().items())
                     if k != "kind"})
    manifest["algorithm"] = alg
    cfg = report.config
    for key, value in sorted(vars(cfg).items()):
        if key in ("max_iter", "tol"):
            continue  # carried by the iters/tol entries below
        if key == "seed":
            key = "probe_seed"
        manifest[key] = f"{value:g}" if isinstance(value, float) else value
    manifest["iters"] = iters
    manifest["tol"] = f"{tol:g}"
    manifest["metric"] = instance.metric
    manifest["version"] = __version__
    manifest["start_time"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    manifest["wall_time_s"] = f"{report.counters.wall_time_s:.6f}"
    return manifest


SUMMARY_COLUMNS = {
    "composite": ("#iter", "#f", "#grad", "#prox", "time"),
    "sun_vi": ("#iter", "#F", "#prox", "time"),
    "matrix_game": ("#iter", "#mult", "#prox", "time"),
}


def summary_table(kind: str, rows: list[tuple[str, SolveReport]]) -> str:
    family = "composite" if kind in COMPOSITE_KINDS else kind
    cols = SUMMARY_COLUMNS[family]
    table = [("",) + cols]
    for alg, rep in rows:
        c = rep.counters
        n_iter = len(rep.trace)
        t = f"{c.wall_time_s:.2f}"
        if family == "composite":
            table.append((alg, str(n_iter), str(c.n_f), str(c.n_F),
                          str(c.n_prox), t))
        elif family == "sun_vi":
            table.append((alg, str(n_iter), str(c.n_F), str(c.n_prox), t))
        else:
            table.append((alg, str(n_iter), str(c.n_mult), str(c.n_prox), t))
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip()
             for row in table]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pegbench",
                                description="First-order VI solver benchmarks")
    p.add_argument("--problem", required=True, choices=sorted(PROBLEM_ALIASES))
    p.add_argument("--dist", choices=("uniform", "normal"), default="uniform",
                   help="matrix-game entry distribution")
    p.add_argument("--algs", required=True,
                   help="comma-separated ids: " + ",".join(ALL_ALGS))
    p.add_argument("--iters", type=int, default=None,
                   help="iteration budget (default: the problem's benchmark value)")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("bench_out"))
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--lambda-max", dest="lambda_max", type=float, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    kind = PROBLEM_ALIASES[args.problem]
    algs = [a.strip() for a in args.algs.split(",") if a.strip()]
    for alg in algs:
        if alg not in ALL_ALGS:
            print(f"error: unknown algorithm {alg!r}", file=sys.stderr)
            return 2
        if alg in COMPOSITE_ONLY and kind not in COMPOSITE_KINDS:
            print(f"error: {alg} does not apply to {kind}", file=sys.stderr)
            return 2
        if alg in GAME_ONLY and kind != "matrix_game":
            print(f"error: {alg} only applies to matrix_game", file=sys.stderr)
            return 2
    if args.iters is not None and args.iters < 0:
        print("error: --iters must be nonnegative", file=sys.stderr)
        return 2

    maker = MAKERS[kind]
    if kind == "matrix_game":
        instance = maker(dist=args.dist, seed=args.seed)
    else:
        instance = maker(seed=args.seed)
    iters = args.iters if args.iters is not None else instance.recommended_iters
    overrides = {"alpha": args.alpha, "sigma": args.sigma, "theta": args.theta,
                 "beta": args.beta, "lambda_max": args.lambda_max}

    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for alg in algs:
        try:
            report = run_algorithm(instance, alg, iters, args.tol, overrides)
        except LinesearchError as exc:
            print(f"error: linesearch failed for {alg} on {kind}: {exc}",
                  file=sys.stderr)
            return 3
        manifest = build_manifest(instance, alg, iters, args.tol, report)
        # zero the per-row timing so identical runs give byte-identical bodies
        written = [replace(t, elapsed_s=0.0) for t in report.trace]
        write_trace_csv(args.out / f"{kind}_{alg}.csv", manifest, written)
        rows.append((alg, report))
    table = summary_table(kind, rows)
    (args.out / "summary.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return 0


def entry() -> None:
    sys.exit(main())
