"""Extrapolated proximal gradient solvers with adaptive nonmonotone linesearch.

Three variants share one outer loop

    y_n     = x_n + tau_n (x_n - x_{n-1})
    x_{n+1} = prox_{lambda_n g}(x_n - lambda_n F(y_n))

and differ only in how the inner linesearch picks (tau_n, lambda_n):

* ``alg1_solve`` (projected variant): tau_n = sigma^i and lambda_n is the
  largest admissible root of a scalar quadratic, so stepsizes may grow
  between iterations.
* ``alg2_solve`` (general variant): the trial extrapolation may grow up to
  sqrt(1 + tau_{n-1}) and the stepsize is tied to it, lambda_n =
  tau_n lambda_{n-1}.
* ``alg3_solve`` (composite minimization): relaxation theta in [1, 2]
  enlarges the stepsize to (2 - 1/theta) tau_n lambda_{n-1}; theta = 1
  reproduces alg2 exactly, trial for trial.

Each inner trial costs exactly one operator evaluation, or none when the
operator is affine (the extrapolated value is an affine combination of two
cached evaluations).  Every outer iteration costs exactly one prox call.
Diagnostics (the stopping residual) are tallied on a separate shadow
counter so the reported evaluation counts match the benchmark convention.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (Counters, MonotoneMap, SolverConfig, SolverState, Vector,
                   VIProblem, CompositeProblem, affine_extrapolated_value,
                   as_vector, ergodic_point, ergodic_update, extrapolate,
                   _lambda0_probe)
from .metrics import natural_residual

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

TOL_REACHED = "tol_reached"
MAX_ITER = "max_iter"
LINESEARCH_FAILED = "linesearch_failed"


class LinesearchError(RuntimeError):
    """Inner loop exhausted its trial budget.

    Termination is guaranteed for locally Lipschitz operators, so
    exhaustion signals a modeling bug or a domain violation and is a hard
    error rather than a silent stall.
    """


@dataclass
class LinesearchOutcome:
    tau: float
    lam: float
    y: Vector
    F_y: Vector
    inner_iters: int


@dataclass
class IterationTrace:
    """One per-iteration record; counters are cumulative."""

    iter: int
    residual: float
    lam: float
    tau: float
    ls_inner: int
    n_F: int
    n_f: int
    n_prox: int
    n_mult: int
    elapsed_s: float


@dataclass
class RunInit:
    """Anchor data of the ergodic-rate bound for one run.

    The anchor is the first iteration whose *previous* iterate is itself a
    prox output, which makes the bound hold exactly along the run rather
    than approximately; with the x_1 = x_0 initialization used here that
    is iteration 2.
    """

    x1: Vector
    y0: Vector
    lam1: float
    tau1: float
    x0: Vector
    alpha: float


@dataclass
class IterateSnapshot:
    """Read-only view of one iteration handed to trace hooks.

    Arrays are the solver's own (rebound, never mutated in place); hooks
    must not modify them.
    """

    n: int
    x: Vector
    x_next: Vector
    y: Vector
    y_prev: Vector
    F_y: Vector
    F_y_prev: Optional[Vector]
    lam: float
    tau: float
    lam_prev: float
    tau_prev: float
    ls_inner: int
    alpha: float
    variant: str
    theta: Optional[float] = None
    ergodic_weight: float = 0.0
    ergodic_sum: Optional[Vector] = None


@dataclass
class SolveReport:
    final_x: Vector
    final_y: Vector
    trace: list[IterationTrace]
    counters: Counters
    shadow: Counters
    ergodic_x: Vector
    termination: str
    run_init: Optional[RunInit]
    algorithm: str = ""
    config: object = None  # resolved configuration, attached by the harness


def _ls_ok(lhs: float, rhs: float, scale: float = 0.0) -> bool:
    # accepted-step inequality with 1e-12 slack relative to the magnitude
    # of the data entering both sides (both are differences of vectors of
    # that magnitude, so eps-level noise scales with it, not with rhs)
    return lhs <= rhs + 1e-12 * max(1.0, lhs, rhs, scale)


def max_feasible_lambda(u: Vector, c: Vector, r: float,
                        bound: float) -> Optional[float]:
    """Supremum of {lam in (0, bound] : ||lam u - c|| <= r}, or None.

    The constraint is the scalar quadratic lam^2 ||u||^2 - 2 lam <u, c> +
    ||c||^2 - r^2 <= 0, solved in closed form.  A degenerate u = 0 makes
    the constraint lambda-free: the answer is ``bound`` when ||c|| <= r and
    None otherwise.
    """
    if r < 0.0:
        raise ValueError("r must be nonnegative")
    if bound <= 0.0:
        raise ValueError("bound must be positive")
    a = float(np.dot(u, u))
    if a == 0.0:
        return bound if float(np.linalg.norm(c)) <= r else None
    b = float(np.dot(u, c))
    gamma = float(np.dot(c, c)) - r * r
    disc = b * b - a * gamma
    if disc < 0.0:
        # tolerate eps-level cancellation when the feasible interval is a point
        if disc >= -8e-16 * (b * b + abs(a * gamma)):
            disc = 0.0
        else:
            return None
    sq = math.sqrt(disc)
    if b >= 0.0:
        hi = (b + sq) / a
        lo = gamma / (b + sq) if (b + sq) > 0.0 else 0.0
    else:
        lo = (b - sq) / a
        hi = gamma / (b - sq)
    if hi <= 0.0 or lo > bound:
        return None
    return min(hi, bound)


def _polish_root(lam: float, u: Vector, c: Vector, r: float) -> float:
    """Largest stepsize that passes the double-precision feasibility test.

    The closed-form root can land an eps-of-the-data outside the interval
    when the discriminant cancels; back off geometrically toward the
    interval center until ``||lam u - c|| <= r`` holds as evaluated.
    """
    if float(np.linalg.norm(lam * u - c)) <= r:
        return lam
    center = max(float(np.dot(u, c)) / float(np.dot(u, u)), 0.0)
    gap = lam - center
    shrink = 1e-13
    for _ in range(50):
        trial = center + gap * (1.0 - shrink)
        if trial > 0.0 and float(np.linalg.norm(trial * u - c)) <= r:
            return trial
        shrink *= 2.0
        if shrink >= 1.0:
            break
    return center if center > 0.0 else lam


def alg1_linesearch(state: SolverState, F: MonotoneMap, cfg: SolverConfig, *,
                    counters: Optional[Counters] = None,
                    domain_affine: bool = False) -> LinesearchOutcome:
    """Projected-variant linesearch: largest stepsize trial by trial.

    For i = 0, 1, ... the trial uses tau = sigma^i and the largest
    lambda <= min((1 + tau_prev)/tau * lambda_prev, lambda_max) with

        ||lambda F(y) - lambda_prev tau F(y_prev)|| <= alpha ||y - y_prev||.

    When the domain of g is affine both stepsize bounds are dropped.  A
    non-finite operator value counts as a failed trial.
    """
    if counters is None:
        counters = Counters()
    for i in range(cfg.max_ls_iter):
        tau = cfg.sigma ** i
        y = extrapolate(state.x_curr, state.x_prev, tau)
        plain_bound = (1.0 + state.tau_prev) / tau * state.lambda_prev
        bound = math.inf if domain_affine else min(plain_bound, cfg.lambda_max)
        r = cfg.alpha * float(np.linalg.norm(y - state.y_prev))
        if r == 0.0:
            # zero-displacement trial: F(y) = F(y_prev) exactly, the
            # inequality holds with equality and no evaluation is needed;
            # tie-break toward the largest admissible stepsize
            F_y = state.F_y_prev
            if float(np.dot(F_y, F_y)) == 0.0:
                lam = bound if math.isfinite(bound) else plain_bound
            else:
                lam = state.lambda_prev * tau
            return LinesearchOutcome(tau, lam, y, F_y, i + 1)
        if F.is_affine:
            F_y = affine_extrapolated_value(state.F_x_curr, state.F_x_prev, tau)
        else:
            F_y = counters.eval_F(F, y)
        if not np.all(np.isfinite(F_y)):
            continue
        c = (state.lambda_prev * tau) * state.F_y_prev
        lam = max_feasible_lambda(F_y, c, r, bound)
        if lam is not None:
            if not math.isfinite(lam):
                # unbounded feasible set under the affine-domain relaxation
                lam = min(plain_bound, cfg.lambda_max)
            else:
                lam = _polish_root(lam, F_y, c, r)
            scale = lam * float(np.linalg.norm(F_y)) + float(np.linalg.norm(c))
            assert _ls_ok(float(np.linalg.norm(lam * F_y - c)), r, scale), \
                "accepted stepsize violates the linesearch inequality"
            return LinesearchOutcome(tau, lam, y, F_y, i + 1)
    raise LinesearchError(f"no admissible stepsize in {cfg.max_ls_iter} trials")


def _growth_linesearch(state: SolverState, F: MonotoneMap, cfg: SolverConfig,
                       theta: float, counters: Counters) -> LinesearchOutcome:
    # shared trial loop of the general and composite variants (theta = 1
    # reproduces the general variant bit for bit)
    mult = 2.0 - 1.0 / theta
    if state.lambda_prev <= cfg.lambda_max / 2.0:
        base = math.sqrt((1.0 + theta * state.tau_prev) / (2.0 * theta - 1.0))
    else:
        base = 1.0
    for i in range(cfg.max_ls_iter):
        tau = base * cfg.sigma ** i
        y = extrapolate(state.x_curr, state.x_prev, tau)
        lam = mult * tau * state.lambda_prev
        dy = float(np.linalg.norm(y - state.y_prev))
        if dy == 0.0:
            # F(y) = F(y_prev) exactly; accept without an evaluation
            return LinesearchOutcome(tau, lam, y, state.F_y_prev, i + 1)
        if F.is_affine:
            F_y = affine_extrapolated_value(state.F_x_curr, state.F_x_prev, tau)
        else:
            F_y = counters.eval_F(F, y)
        if not np.all(np.isfinite(F_y)):
            continue
        lhs = lam * float(np.linalg.norm(F_y - state.F_y_prev))
        rhs = cfg.alpha * mult * dy
        if lhs <= rhs:
            return LinesearchOutcome(tau, lam, y, F_y, i + 1)
    raise LinesearchError(f"no admissible stepsize in {cfg.max_ls_iter} trials")


def alg2_linesearch(state: SolverState, F: MonotoneMap, cfg: SolverConfig, *,
                    counters: Optional[Counters] = None,
                    domain_affine: bool = False) -> LinesearchOutcome:
    """General-variant linesearch: lambda = tau * lambda_prev.

    The trial extrapolation starts at sqrt(1 + tau_prev) (growth branch,
    taken whenever lambda_prev <= lambda_max / 2) and shrinks by sigma
    until lambda ||F(y) - F(y_prev)|| <= alpha ||y - y_prev||.
    """
    if counters is None:
        counters = Counters()
    out = _growth_linesearch(state, F, cfg, 1.0, counters)
    assert out.tau <= GOLDEN + 1e-12, "extrapolation exceeded the golden-ratio cap"
    if math.isfinite(cfg.lambda_max):
        assert out.lam <= cfg.lambda_max * (1.0 + 1e-12), "stepsize exceeded lambda_max"
    return out


def alg3_linesearch(state: SolverState, grad: MonotoneMap, cfg: SolverConfig, *,
                    counters: Optional[Counters] = None,
                    domain_affine: bool = False) -> LinesearchOutcome:
    """Composite-variant linesearch with relaxation theta in [1, 2].

    Trials use tau = sqrt((1 + theta tau_prev)/(2 theta - 1)) sigma^i on
    the growth branch, lambda = (2 - 1/theta) tau lambda_prev, and accept
    once lambda ||grad(y) - grad(y_prev)|| <= alpha (2 - 1/theta)
    ||y - y_prev||.
    """
    if counters is None:
        counters = Counters()
    out = _growth_linesearch(state, grad, cfg, cfg.theta, counters)
    assert out.tau < 2.0, "extrapolation must stay below 2"
    return out


_LINESEARCH = {
    "alg1": alg1_linesearch,
    "alg2": alg2_linesearch,
    "alg3": alg3_linesearch,
}


def _solve_loop(problem, cfg: SolverConfig, x0: Vector, variant: str, *,
                fixed: Optional[tuple[float, float]] = None,
                diagnostic: Optional[Callable[[Vector, Optional[Vector]], float]] = None,
                iterate_hook: Optional[Callable[[IterateSnapshot], None]] = None) -> SolveReport:
    if isinstance(problem, CompositeProblem):
        vi = problem.to_vi()
    else:
        vi = problem
    F, g = vi.F, vi.g
    x0 = as_vector(x0)
    if x0.shape[0] != vi.dim:
        raise ValueError("starting point has wrong dimension")
    theta = cfg.theta if variant == "alg3" else None
    counters = Counters()
    shadow = Counters()
    if diagnostic is None:
        diagnostic = lambda x, aux=None: natural_residual(x, vi, 1.0, counters=shadow)

    trace: list[IterationTrace] = []
    termination = MAX_ITER
    run_init: Optional[RunInit] = None
    state: Optional[SolverState] = None

    t0 = time.perf_counter()
    if cfg.max_iter > 0:
        if fixed is not None:
            tau_fix, lam_fix = fixed
            lam0, F_x0 = lam_fix, None
        elif cfg.lambda0 is not None:
            lam0 = min(cfg.lambda0, cfg.lambda_max)
            F_x0 = counters.eval_F(F, x0)
        else:
            lam0, _, F_x0 = _lambda0_probe(lambda v: counters.eval_F(F, v),
                                           x0, cfg.alpha, cfg.seed)
            lam0 = min(lam0, cfg.lambda_max)
        # x_1 = x_0 = y_0: the probe point only calibrates lambda_0, so the
        # run starts from feasible data and iteration 1 accepts immediately
        state = SolverState(x_curr=x0.copy(), x_prev=x0.copy(), y_prev=x0.copy(),
                            F_y_prev=F_x0, lambda_prev=lam0, tau_prev=1.0,
                            ergodic_sum=np.zeros_like(x0))
        if F.is_affine and F_x0 is not None:
            state.F_x_curr = F_x0
            state.F_x_prev = F_x0

        if fixed is not None:
            def ls(st, Fop, c, *, counters, domain_affine):
                y = extrapolate(st.x_curr, st.x_prev, tau_fix)
                return LinesearchOutcome(tau_fix, lam_fix, y,
                                         counters.eval_F(Fop, y), 0)
        else:
            ls = _LINESEARCH[variant]

        for n in range(1, cfg.max_iter + 1):
            out = ls(state, F, cfg, counters=counters,
                     domain_affine=g.domain_affine)
            x_next = g.prox(out.lam, state.x_curr - out.lam * out.F_y)
            counters.n_prox += 1
            if n == 2:
                run_init = RunInit(x1=state.x_curr, y0=state.y_prev,
                                   lam1=out.lam, tau1=out.tau,
                                   x0=state.x_prev, alpha=cfg.alpha)
                ergodic_update(state, out.lam, out.y,
                               first_iter_data=(out.tau, state.x_curr))
            elif n >= 3:
                ergodic_update(state, out.lam, out.y)
            res = diagnostic(x_next, None)
            if iterate_hook is not None:
                iterate_hook(IterateSnapshot(
                    n=n, x=state.x_curr, x_next=x_next, y=out.y,
                    y_prev=state.y_prev, F_y=out.F_y, F_y_prev=state.F_y_prev,
                    lam=out.lam, tau=out.tau, lam_prev=state.lambda_prev,
                    tau_prev=state.tau_prev, ls_inner=out.inner_iters,
                    alpha=cfg.alpha, variant=variant, theta=theta,
                    ergodic_weight=state.ergodic_weight,
                    ergodic_sum=state.ergodic_sum))
            trace.append(IterationTrace(n, res, out.lam, out.tau,
                                        out.inner_iters, counters.n_F,
                                        counters.n_f, counters.n_prox,
                                        counters.n_mult,
                                        time.perf_counter() - t0))
            if F.is_affine and state.F_x_curr is not None:
                state.F_x_prev = state.F_x_curr
                state.F_x_curr = counters.eval_F(F, x_next)
            state.x_prev = state.x_curr
            state.x_curr = x_next
            state.y_prev = out.y
            state.F_y_prev = out.F_y
            state.lambda_prev = out.lam
            state.tau_prev = out.tau
            state.iter = n
            if cfg.tol > 0.0 and res <= cfg.tol:
                termination = TOL_REACHED
                break
    counters.wall_time_s = time.perf_counter() - t0

    final_x = state.x_curr if state is not None else x0.copy()
    final_y = state.y_prev if state is not None else x0.copy()
    if state is not None and state.ergodic_weight > 0.0:
        erg = ergodic_point(state)
    else:
        erg = final_x.copy()
    return SolveReport(final_x=final_x, final_y=final_y, trace=trace,
                       counters=counters, shadow=shadow, ergodic_x=erg,
                       termination=termination, run_init=run_init,
                       algorithm=variant)


def alg1_solve(problem: VIProblem, cfg: SolverConfig, x0: Vector, *,
               diagnostic=None, iterate_hook=None) -> SolveReport:
    """Projected variant.  Convergence theory covers indicator g; for other
    prox-friendly g the projection step generalizes to prox_{lambda g}, a
    heuristic that the benchmarks exercise on the l1-regularized problem."""
    return _solve_loop(problem, cfg, x0, "alg1", diagnostic=diagnostic,
                       iterate_hook=iterate_hook)


def alg2_solve(problem: VIProblem, cfg: SolverConfig, x0: Vector, *,
               diagnostic=None, iterate_hook=None) -> SolveReport:
    """General composite-VI variant."""
    return _solve_loop(problem, cfg, x0, "alg2", diagnostic=diagnostic,
                       iterate_hook=iterate_hook)


def alg3_solve(problem: CompositeProblem, cfg: SolverConfig, x0: Vector, *,
               diagnostic=None, iterate_hook=None) -> SolveReport:
    """Composite-minimization variant (theta-relaxed stepsizes)."""
    if not isinstance(problem, CompositeProblem):
        raise TypeError("alg3_solve needs a CompositeProblem")
    return _solve_loop(problem, cfg, x0, "alg3", diagnostic=diagnostic,
                       iterate_hook=iterate_hook)


def fixed_step_solve(problem, cfg: SolverConfig, x0: Vector, lam: float,
                     variant: str = "alg2", *, diagnostic=None,
                     iterate_hook=None) -> SolveReport:
    """Fixed-stepsize special case: no linesearch, constant extrapolation.

    ``variant="alg2"`` uses tau = 1 (the reflected step); ``variant="alg3"``
    uses tau = theta / (2 theta - 1).  The caller must supply lam below
    alpha/L respectively alpha (2 theta - 1)/(theta L); divergence for too
    large lam is the caller's responsibility.  One operator evaluation and
    one prox per iteration.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if variant == "alg2":
        tau = 1.0
    elif variant == "alg3":
        tau = cfg.theta / (2.0 * cfg.theta - 1.0)
    else:
        raise ValueError(f"unknown fixed-step variant {variant!r}")
    return _solve_loop(problem, cfg, x0, variant, fixed=(tau, lam),
                       diagnostic=diagnostic, iterate_hook=iterate_hook)
