"""Core data model shared by all solvers in the package.

Points live in a finite-dimensional real space and are represented as 1-D
float64 numpy arrays.  Problems bundle a monotone operator (or the gradient
of a smooth convex function) with a prox-friendly regularizer; solvers never
look past these two interfaces.

Evaluation accounting is centralized in :class:`Counters` so the benchmark
harness can reproduce the per-table tallies (#F / #grad, #f, #prox, #mult)
without sprinkling bookkeeping through the numerics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray

SQRT2 = math.sqrt(2.0)


def as_vector(x) -> Vector:
    """Coerce ``x`` to a finite 1-D float64 array."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


class MonotoneMap:
    """A point-to-point operator ``F`` plus the capability flags solvers use.

    Parameters
    ----------
    fn :
        The evaluator, mapping a vector to a vector of the same dimension.
    is_affine :
        When true, solvers may form extrapolated values as affine
        combinations of cached evaluations instead of calling ``fn``.
    mult_per_eval :
        Number of matrix-vector products one evaluation costs.  Only
        meaningful for problems whose benchmark tables count
        multiplications rather than operator calls.
    gradient_of :
        Smooth value evaluator ``f`` when this map is ``grad f``; ``None``
        for genuine VI operators.
    """

    def __init__(self, fn: Callable[[Vector], Vector], *, is_affine: bool = False,
                 mult_per_eval: int = 0, gradient_of: Optional[Callable[[Vector], float]] = None):
        self.fn = fn
        self.is_affine = bool(is_affine)
        self.mult_per_eval = int(mult_per_eval)
        self.gradient_of = gradient_of

    def __call__(self, x: Vector) -> Vector:
        return self.fn(x)

    @property
    def is_gradient(self) -> bool:
        return self.gradient_of is not None


@dataclass
class Counters:
    """Evaluation tallies mirroring the benchmark table columns.

    All fields are nonnegative and nondecreasing over a run.  ``eval_F`` is
    the single funnel through which solvers evaluate an operator so that
    ``n_F`` and ``n_mult`` can never drift apart.
    """

    n_F: int = 0
    n_f: int = 0
    n_prox: int = 0
    n_mult: int = 0
    wall_time_s: float = 0.0

    def eval_F(self, F: MonotoneMap, x: Vector) -> Vector:
        self.n_F += 1
        self.n_mult += F.mult_per_eval
        return F(x)

    def copy(self) -> "Counters":
        return Counters(self.n_F, self.n_f, self.n_prox, self.n_mult, self.wall_time_s)


@dataclass
class VIProblem:
    """Monotone variational inequality: find x* with
    <F(x*), x - x*> + g(x) - g(x*) >= 0 for all x."""

    F: MonotoneMap
    g: "ProxFriendly"
    dim: int

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dimension must be positive")


@dataclass
class CompositeProblem:
    """Composite minimization min f(x) + g(x) with smooth convex f."""

    f_value: Callable[[Vector], float]
    f_grad: MonotoneMap
    g: "ProxFriendly"
    dim: int

    def to_vi(self) -> VIProblem:
        """First-order optimality conditions as a VI (F = grad f)."""
        return VIProblem(F=self.f_grad, g=self.g, dim=self.dim)

    def objective(self, x: Vector) -> float:
        return float(self.f_value(x)) + self.g.value(x)


@dataclass
class SolverConfig:
    """Parameters of the extrapolated proximal gradient solvers.

    ``lambda0 = None`` requests the automatic probe: a random point in a
    tiny neighborhood of the start estimates the inverse local Lipschitz
    constant (see ``init_lambda0``).
    """

    alpha: float = 0.41
    sigma: float = 0.7
    lambda_max: float = math.inf
    theta: float = 2.0
    lambda0: Optional[float] = None
    max_iter: int = 1000
    max_ls_iter: int = 60
    tol: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < SQRT2 - 1.0:
            raise ValueError("alpha must lie strictly in (0, sqrt(2)-1)")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if self.lambda_max <= 0.0:
            raise ValueError("lambda_max must be positive")
        if not 1.0 <= self.theta <= 2.0:
            raise ValueError("theta must lie in [1, 2]")
        if self.lambda0 is not None:
            if self.lambda0 <= 0.0:
                raise ValueError("lambda0 must be positive")
            if self.lambda0 > self.lambda_max:
                raise ValueError("lambda0 must not exceed lambda_max")
        if self.max_iter < 0 or self.max_ls_iter <= 0:
            raise ValueError("iteration budgets must be nonnegative/positive")
        if self.tol < 0.0:
            raise ValueError("tol must be nonnegative")


@dataclass
class SolverState:
    """Rolling iterate state of one solver instance (single owner).

    ``F_x_curr`` / ``F_x_prev`` cache operator values at the iterates and
    are populated only for affine operators, where extrapolated values are
    affine combinations of the caches.
    """

    x_curr: Vector
    x_prev: Vector
    y_prev: Vector
    F_y_prev: Optional[Vector]
    lambda_prev: float
    tau_prev: float
    ergodic_sum: Vector
    ergodic_weight: float = 0.0
    iter: int = 0
    F_x_curr: Optional[Vector] = None
    F_x_prev: Optional[Vector] = None


def extrapolate(x: Vector, x_prev: Vector, tau: float) -> Vector:
    """Extrapolated point x + tau * (x - x_prev)."""
    if x.shape != x_prev.shape:
        raise ValueError("dimension mismatch in extrapolate")
    return x + tau * (x - x_prev)


def affine_extrapolated_value(Fx: Vector, Fx_prev: Vector, tau: float) -> Vector:
    """Operator value at the extrapolated point for affine F.

    Equals (1 + tau) * F(x) - tau * F(x_prev) and therefore costs no
    operator evaluation.
    """
    return (1.0 + tau) * Fx - tau * Fx_prev


def _lambda0_probe(eval_F: Callable[[Vector], Vector], x0: Vector, alpha: float,
                   seed: int) -> tuple[float, Vector, Vector]:
    """Shared implementation of the stepsize probe.

    Returns (lambda0, x1, F(x0)); ``eval_F`` lets callers count the two
    operator evaluations the probe costs.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(x0.shape[0])
    nrm = np.linalg.norm(u)
    if nrm == 0.0:  # astronomically unlikely; any direction works
        u = np.zeros_like(x0)
        u[0] = 1.0
        nrm = 1.0
    u = u / nrm
    delta = 1e-6 * (1.0 + float(np.linalg.norm(x0)))
    x1 = x0 + delta * u
    F_x0 = eval_F(x0)
    F_x1 = eval_F(x1)
    dF = float(np.linalg.norm(F_x1 - F_x0))
    dx = float(np.linalg.norm(x1 - x0))
    if dF == 0.0 or not math.isfinite(dF):
        # degenerate direction (constant F, or probe outside the domain);
        # any positive value is valid since the linesearch self-corrects
        return 1.0, x1, F_x0
    return alpha * dx / dF, x1, F_x0


def init_lambda0(F: MonotoneMap, x0: Vector, alpha: float, seed: int) -> tuple[float, Vector]:
    """Initial stepsize from a probe point in a small neighborhood of x0.

    Picks x1 = x0 + delta * u with a seeded random unit direction u and
    delta = 1e-6 * (1 + ||x0||), then returns the largest lambda with
    lambda * ||F(x1) - F(x0)|| <= alpha * ||x1 - x0||.  Falls back to 1
    when F(x1) = F(x0).
    """
    if not 0.0 < alpha < SQRT2 - 1.0:
        raise ValueError("alpha must lie in (0, sqrt(2)-1)")
    lam0, x1, _ = _lambda0_probe(F, x0, alpha, seed)
    return lam0, x1


def ergodic_update(state: SolverState, lambda_n: float, y_n: Vector,
                   first_iter_data: Optional[tuple[float, Vector]] = None) -> SolverState:
    """Accumulate the stepsize-weighted ergodic average online.

    The first call installs the base terms weight = lambda_1 + tau_1 *
    lambda_1 and sum = (1 + tau_1) * lambda_1 * x_1, taking (tau_1, x_1)
    from ``first_iter_data``; later calls add lambda_n and lambda_n * y_n.
    Accumulators are rebound, never mutated in place, so previously
    observed arrays stay valid.
    """
    if lambda_n <= 0.0:
        raise ValueError("lambda_n must be positive")
    if state.ergodic_weight == 0.0:
        if first_iter_data is None:
            raise ValueError("first ergodic update needs (tau_1, x_1)")
        tau1, x1 = first_iter_data
        state.ergodic_weight = lambda_n + tau1 * lambda_n
        state.ergodic_sum = (1.0 + tau1) * lambda_n * x1
    else:
        state.ergodic_weight = state.ergodic_weight + lambda_n
        state.ergodic_sum = state.ergodic_sum + lambda_n * y_n
    return state


def ergodic_point(state: SolverState) -> Vector:
    """Current ergodic average sum / weight."""
    if state.ergodic_weight <= 0.0:
        raise RuntimeError("ergodic_point called before any ergodic update")
    return state.ergodic_sum / state.ergodic_weight
