"""Comparison methods: backtracking proximal gradient, FISTA, Tseng's
forward-backward-forward splitting, and the primal-dual method for the
matrix game.

The backtracking of PGM/FISTA is the classical Armijo-type rule: each inner
trial costs one prox and one smooth-function value, and the stepsize
sequence is nonincreasing across iterations.  FBF restarts its inner loop
at delta * lambda_prev (delta > 1 allows growth, with boundedness enforced
by a cap) and needs one extra operator value per outer iteration for the
correction step.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (Counters, CompositeProblem, Vector, VIProblem,
                   as_vector, _lambda0_probe)
from .metrics import natural_residual
from .prox import project_simplex
from .solvers import (IterationTrace, LinesearchError, SolveReport,
                      MAX_ITER, TOL_REACHED)

# Inner-trial cap.  A warm-started stepsize over curvature that spans many
# orders of magnitude (exponential objectives far from the optimum) can need
# well over a hundred consecutive shrinks in the first iteration.
_MAX_INNER = 200


@dataclass
class BacktrackConfig:
    """Backtracking parameters shared by PGM, FISTA and FBF.

    ``delta`` only matters for FBF; values above 1 let stepsizes grow, so
    the run additionally caps lambda at ``lambda_growth_cap * lambda_init``
    to retain boundedness.
    """

    beta: float = 0.7
    lambda_init: float = 1.0
    delta: float = 1.0
    theta_fbf: float = 0.9
    lambda_growth_cap: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.lambda_init <= 0.0:
            raise ValueError("lambda_init must be positive")
        if self.delta < 1.0:
            raise ValueError("delta must be >= 1")
        if not 0.0 < self.theta_fbf < 1.0:
            raise ValueError("theta_fbf must lie in (0, 1)")


@dataclass
class PDConfig:
    tau_pd: float
    sigma_pd: float

    def __post_init__(self):
        if self.tau_pd <= 0.0 or self.sigma_pd <= 0.0:
            raise ValueError("primal-dual stepsizes must be positive")


def _finish(trace, counters, shadow, x, y, termination, t0, algorithm):
    counters.wall_time_s = time.perf_counter() - t0
    return SolveReport(final_x=x, final_y=y, trace=trace, counters=counters,
                       shadow=shadow, ergodic_x=x.copy(), termination=termination,
                       run_init=None, algorithm=algorithm)


def _descent_backtrack(problem, cfg, x, fx, gx, lam, counters):
    # inner loop of PGM/FISTA: shrink lam until the quadratic upper model
    # at x dominates f at the prox-gradient point z
    for trial in range(1, _MAX_INNER + 1):
        z = problem.g.prox(lam, x - lam * gx)
        counters.n_prox += 1
        fz = float(problem.f_value(z))
        counters.n_f += 1
        dz = z - x
        if fz <= fx + float(np.dot(gx, dz)) + float(np.dot(dz, dz)) / (2.0 * lam):
            return z, lam, trial
        lam *= cfg.beta
    raise LinesearchError(f"descent backtracking exhausted {_MAX_INNER} trials")


def pgm_solve(problem: CompositeProblem, cfg: BacktrackConfig, x0: Vector,
              max_iter: int, tol: float = 0.0, *, diagnostic=None) -> SolveReport:
    """Proximal gradient method with Armijo-type backtracking.

    Per outer iteration: one f and one gradient evaluation at x_n, then one
    prox and one f evaluation per inner trial.  The inner loop starts at
    the previously accepted stepsize, so (lambda_n) is nonincreasing.
    """
    vi = problem.to_vi()
    x = as_vector(x0)
    counters, shadow = Counters(), Counters()
    if diagnostic is None:
        diagnostic = lambda v, aux=None: natural_residual(v, vi, 1.0, counters=shadow)
    trace: list[IterationTrace] = []
    termination = MAX_ITER
    lam = cfg.lambda_init
    t0 = time.perf_counter()
    for n in range(1, max_iter + 1):
        fx = float(problem.f_value(x))
        counters.n_f += 1
        gx = counters.eval_F(problem.f_grad, x)
        x_next, lam, trials = _descent_backtrack(problem, cfg, x, fx, gx, lam, counters)
        res = diagnostic(x_next, None)
        trace.append(IterationTrace(n, res, lam, 0.0, trials, counters.n_F,
                                    counters.n_f, counters.n_prox,
                                    counters.n_mult, time.perf_counter() - t0))
        x = x_next
        if tol > 0.0 and res <= tol:
            termination = TOL_REACHED
            break
    return _finish(trace, counters, shadow, x, x.copy(), termination, t0, "pgm")


def fista_solve(problem: CompositeProblem, cfg: BacktrackConfig, x0: Vector,
                max_iter: int, tol: float = 0.0, *, diagnostic=None) -> SolveReport:
    """Accelerated proximal method with the same backtracking as PGM.

    Standard momentum recursion t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2
    with extrapolation coefficient (t_k - 1)/t_{k+1}; the backtracking is
    applied at the extrapolated point, and the first iteration coincides
    with a PGM iteration.
    """
    vi = problem.to_vi()
    x = as_vector(x0)
    w = x.copy()
    t = 1.0
    counters, shadow = Counters(), Counters()
    if diagnostic is None:
        diagnostic = lambda v, aux=None: natural_residual(v, vi, 1.0, counters=shadow)
    trace: list[IterationTrace] = []
    termination = MAX_ITER
    lam = cfg.lambda_init
    t0 = time.perf_counter()
    for n in range(1, max_iter + 1):
        fw = float(problem.f_value(w))
        counters.n_f += 1
        gw = counters.eval_F(problem.f_grad, w)
        x_next, lam, trials = _descent_backtrack(problem, cfg, w, fw, gw, lam, counters)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        coef = (t - 1.0) / t_next
        w = x_next + coef * (x_next - x)
        t = t_next
        res = diagnostic(x_next, None)
        trace.append(IterationTrace(n, res, lam, coef, trials,
                                    counters.n_F, counters.n_f, counters.n_prox,
                                    counters.n_mult, time.perf_counter() - t0))
        x = x_next
        if tol > 0.0 and res <= tol:
            termination = TOL_REACHED
            break
    return _finish(trace, counters, shadow, x, w, termination, t0, "fista")


def fbf_solve(problem: VIProblem, cfg: BacktrackConfig, x0: Vector,
              max_iter: int, tol: float = 0.0, *, diagnostic=None,
              lambda0: Optional[float] = None) -> SolveReport:
    """Tseng's forward-backward-forward method with delta-scaled linesearch.

    Inner trial: z = prox_{lam g}(x - lam F(x)), accepted once
    lam ||F(z) - F(x)|| <= theta ||z - x|| (test first, then shrink).  The
    accepted operator value is reused in the correction step

        x_next = z - lam (F(z) - F(x)),

    so each outer iteration costs one F(x) plus one F per trial.  The
    initial stepsize comes from the same probe as the adaptive solvers,
    with theta in place of alpha.
    """
    x = as_vector(x0)
    counters, shadow = Counters(), Counters()
    if diagnostic is None:
        diagnostic = lambda v, aux=None: natural_residual(v, problem, 1.0, counters=shadow)
    trace: list[IterationTrace] = []
    termination = MAX_ITER
    t0 = time.perf_counter()
    if lambda0 is not None:
        lam = lambda0
    else:
        lam, _, _ = _lambda0_probe(lambda v: counters.eval_F(problem.F, v), x,
                                   cfg.theta_fbf, seed=0)
    lam = min(lam, cfg.lambda_init * cfg.lambda_growth_cap)
    cap = cfg.lambda_growth_cap * cfg.lambda_init
    for n in range(1, max_iter + 1):
        Fx = counters.eval_F(problem.F, x)
        lam = min(cfg.delta * lam, cap)
        accepted = False
        for trial in range(1, _MAX_INNER + 1):
            z = problem.g.prox(lam, x - lam * Fx)
            counters.n_prox += 1
            Fz = counters.eval_F(problem.F, z)
            if np.all(np.isfinite(Fz)):
                diff = Fz - Fx
                if lam * float(np.linalg.norm(diff)) <= cfg.theta_fbf * float(np.linalg.norm(z - x)):
                    accepted = True
                    break
            lam *= cfg.beta
        if not accepted:
            raise LinesearchError(f"FBF inner loop exhausted {_MAX_INNER} trials")
        x_next = z - lam * diff
        res = diagnostic(x_next, z)
        trace.append(IterationTrace(n, res, lam, 0.0, trial, counters.n_F,
                                    counters.n_f, counters.n_prox,
                                    counters.n_mult, time.perf_counter() - t0))
        x = x_next
        if tol > 0.0 and res <= tol:
            termination = TOL_REACHED
            break
    return _finish(trace, counters, shadow, x, x.copy(), termination, t0,
                   f"fbf{cfg.delta:g}")


def cp_pd_solve(A: np.ndarray, x0: Vector, y0: Vector, cfg: PDConfig,
                max_iter: int, tol: float = 0.0, *, diagnostic=None) -> SolveReport:
    """Primal-dual method for the matrix game min-max <Ax, y> on simplices.

    Fixed steps tau, sigma with tau * sigma * ||A||^2 <= 1 and primal
    over-relaxation 2 x_{n+1} - x_n feeding the dual ascent.  Exactly two
    matrix-vector products and one (product) projection per iteration.
    """
    k, l = A.shape
    x = as_vector(x0)
    y = as_vector(y0)
    if x.shape[0] != l or y.shape[0] != k:
        raise ValueError("starting points do not match the matrix shape")
    counters, shadow = Counters(), Counters()
    trace: list[IterationTrace] = []
    termination = MAX_ITER
    t0 = time.perf_counter()
    xbar = x.copy()
    for n in range(1, max_iter + 1):
        Axbar = A @ xbar
        counters.n_mult += 1
        y = project_simplex(y + cfg.sigma_pd * Axbar)
        ATy = A.T @ y
        counters.n_mult += 1
        x_next = project_simplex(x - cfg.tau_pd * ATy)
        counters.n_prox += 1  # two simplex projections count as one prox
        xbar = 2.0 * x_next - x
        x = x_next
        z = np.concatenate([x, y])
        if diagnostic is not None:
            res = diagnostic(z, None)
        else:
            shadow.n_mult += 1
            Ax = A @ x
            res = float(np.max(Ax) - np.min(ATy))
        trace.append(IterationTrace(n, res, cfg.tau_pd, cfg.sigma_pd, 0,
                                    counters.n_F, counters.n_f, counters.n_prox,
                                    counters.n_mult, time.perf_counter() - t0))
        if tol > 0.0 and res <= tol:
            termination = TOL_REACHED
            break
    z = np.concatenate([x, y])
    return _finish(trace, counters, shadow, z, z.copy(), termination, t0, "pd")


def spectral_norm(A: np.ndarray, tol: float = 1e-6) -> float:
    """Largest singular value via power iteration on A^T A."""
    n = A.shape[1]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(10_000):
        w = A.T @ (A @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        rho_new = float(v @ w)
        if abs(rho_new - rho) <= tol * max(rho_new, 1e-300):
            rho = rho_new
            break
        rho, v = rho_new, v_new
    return math.sqrt(rho)
