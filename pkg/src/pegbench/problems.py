"""Seeded generators for the six benchmark problems.

Every instance is reproducible from (kind, dims, seed, generator id): data
draws use a fresh PCG64 generator and a fixed draw order, documented per
maker.  Evaluators outside their domain (log barriers, exploding
exponentials) return non-finite values rather than raising, which the
linesearches treat as failed trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import CompositeProblem, MonotoneMap, Vector, VIProblem
from .prox import ball_prox, box_prox, l1_prox, product_prox, simplex_prox, zero_prox

GENERATOR_ID = "numpy-pcg64"

# benchmark iteration budgets, one per problem kind
RECOMMENDED_ITERS = {
    "cons_min": 400,
    "geo_prog": 700,
    "analytic_center": 1000,
    "lp_min": 200,
    "sun_vi": 100,
    "matrix_game": 1000,
}


@dataclass
class RngSpec:
    seed: int
    generator_id: str = GENERATOR_ID

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class ProblemInstance:
    """One generated benchmark problem plus its reproducibility manifest."""

    kind: str
    params: dict
    rng: RngSpec
    problem: VIProblem | CompositeProblem
    x0: Vector
    recommended_iters: int
    metric: str = "residual"
    data: dict = field(default_factory=dict, repr=False)

    @property
    def vi(self) -> VIProblem:
        if isinstance(self.problem, VIProblem):
            return self.problem
        return self.problem.to_vi()

    @property
    def composite(self) -> Optional[CompositeProblem]:
        return self.problem if isinstance(self.problem, CompositeProblem) else None

    def descriptor(self) -> dict:
        """JSON-serializable description sufficient to regenerate the data."""
        return {"kind": self.kind, **self.params,
                "seed": self.rng.seed, "generator_id": self.rng.generator_id}


def make_cons_min(d: int = 10, seed: int = 0) -> ProblemInstance:
    """Ball-constrained minimization of sum q_i (e^{x_i} - x_i - 1) + ||x||^2 / 2.

    Draw order: q uniform on (0, 1000)^d, then x0 uniform on (-50, 50)^d.
    The feasible set is the ball of radius 100.
    """
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.0, 1000.0, d)
    x0 = rng.uniform(-50.0, 50.0, d)

    def f(x):
        with np.errstate(over="ignore"):
            e = np.exp(x)
        return float(np.sum(q * (e - x - 1.0)) + 0.5 * np.dot(x, x))

    def grad(x):
        with np.errstate(over="ignore"):
            e = np.exp(x)
        return q * (e - 1.0) + x

    problem = CompositeProblem(f_value=f,
                               f_grad=MonotoneMap(grad, gradient_of=f),
                               g=ball_prox(100.0), dim=d)
    return ProblemInstance("cons_min", {"d": d}, RngSpec(seed), problem, x0,
                           RECOMMENDED_ITERS["cons_min"], data={"q": q})


def make_geo_prog(d: int = 100, m: int = 50, seed: int = 0) -> ProblemInstance:
    """l1-regularized geometric programming: sum exp(<a_i, x> + b_i) + <c, x> + ||x||_1.

    Draw order: the a_i rows uniform on (0, 1)^d, b uniform on (-1, 1)^m,
    c uniform on (-1, 1)^d; x0 = 0.  Exponent overflow yields inf, handled
    upstream as a failed linesearch trial.
    """
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.0, 1.0, (m, d))
    b = rng.uniform(-1.0, 1.0, m)
    c = rng.uniform(-1.0, 1.0, d)
    x0 = np.zeros(d)

    def f(x):
        with np.errstate(over="ignore"):
            return float(np.sum(np.exp(A @ x + b)) + np.dot(c, x))

    def grad(x):
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(A @ x + b)
            return A.T @ e + c

    problem = CompositeProblem(f_value=f,
                               f_grad=MonotoneMap(grad, gradient_of=f),
                               g=l1_prox(1.0), dim=d)
    return ProblemInstance("geo_prog", {"d": d, "m": m}, RngSpec(seed), problem,
                           x0, RECOMMENDED_ITERS["geo_prog"],
                           data={"A": A, "b": b, "c": c})


def make_analytic_center(d: int = 100, m: int = 1000, seed: int = 0) -> ProblemInstance:
    """Analytic center of the polyhedron {x : <a_i, x> <= b_i}.

    Draw order: the a_i rows uniform on [-1, 1]^d; b is deterministic (the
    first min(100, m) entries 0.01, the rest 100), so x0 = 0 is interior
    but close to a vertex.  Outside the polyhedron both evaluators return
    non-finite markers.
    """
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, (m, d))
    b = np.full(m, 100.0)
    b[:min(100, m)] = 0.01
    x0 = np.zeros(d)

    def slack(x):
        return b - A @ x

    def f(x):
        s = slack(x)
        if np.any(s <= 0.0):
            return math.inf
        return float(-np.sum(np.log(s)))

    def grad(x):
        s = slack(x)
        if np.any(s <= 0.0):
            return np.full(d, np.nan)
        return A.T @ (1.0 / s)

    problem = CompositeProblem(f_value=f,
                               f_grad=MonotoneMap(grad, gradient_of=f),
                               g=zero_prox(), dim=d)
    return ProblemInstance("analytic_center", {"d": d, "m": m}, RngSpec(seed),
                           problem, x0, RECOMMENDED_ITERS["analytic_center"],
                           data={"A": A, "b": b})


def make_lp_min(d: int = 50, m: int = 50, p: float = 3.0, seed: int = 0) -> ProblemInstance:
    """l_p location problem (1/p) sum ||x - a_i||^p, smooth for p >= 2.

    Draw order: the anchor points a_i uniform on [-100, 100]^d, then x0
    uniform on [-1000, 1000]^d (intentionally far from the hull).
    """
    if p < 2.0:
        raise ValueError("p must be >= 2 for a smooth objective")
    rng = np.random.default_rng(seed)
    anchors = rng.uniform(-100.0, 100.0, (m, d))
    x0 = rng.uniform(-1000.0, 1000.0, d)

    def f(x):
        r = x[None, :] - anchors
        nr = np.linalg.norm(r, axis=1)
        return float(np.sum(nr ** p) / p)

    def grad(x):
        r = x[None, :] - anchors
        nr = np.linalg.norm(r, axis=1)
        return (nr ** (p - 2.0)) @ r

    problem = CompositeProblem(f_value=f,
                               f_grad=MonotoneMap(grad, gradient_of=f),
                               g=zero_prox(), dim=d)
    return ProblemInstance("lp_min", {"d": d, "m": m, "p": p}, RngSpec(seed),
                           problem, x0, RECOMMENDED_ITERS["lp_min"],
                           data={"anchors": anchors})


def _sun_operator(d: int) -> Callable[[Vector], Vector]:
    # F = F1 + F2 with quadratic F1 and banded affine F2; O(d) via shifts
    def F(x):
        xm = np.concatenate(([0.0], x[:-1]))   # x_{i-1}, with x_0 = 0
        xp = np.concatenate((x[1:], [0.0]))    # x_{i+1}, with x_{d+1} = 0
        F1 = xm * xm + x * x + xm * x + x * xp
        F2 = 4.0 * x + xm - 2.0 * xp - 1.0
        return F1 + F2
    return F


def sun_dense_operator(d: int) -> Callable[[Vector], Vector]:
    """Dense-matrix reference evaluator of the Sun operator (test oracle)."""
    D = np.zeros((d, d))
    for i in range(d):
        D[i, i] = 4.0
        if i - 1 >= 0:
            D[i, i - 1] = 1.0   # i - j = 1
        if i + 1 < d:
            D[i, i + 1] = -2.0  # i - j = -1
    c = -np.ones(d)

    def F(x):
        F1 = np.zeros(d)
        for i in range(d):
            xim1 = x[i - 1] if i - 1 >= 0 else 0.0
            xip1 = x[i + 1] if i + 1 < d else 0.0
            F1[i] = xim1 ** 2 + x[i] ** 2 + xim1 * x[i] + x[i] * xip1
        return F1 + D @ x + c
    return F


def make_sun(d: int = 1000, seed: int = 0) -> ProblemInstance:
    """Sun's nonlinear variational inequality on the box [0, 100]^d.

    Draw order: x0 uniform on the box.  The operator is evaluated in O(d)
    through the banded structure.
    """
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.0, 100.0, d)
    problem = VIProblem(F=MonotoneMap(_sun_operator(d)),
                        g=box_prox(0.0, 100.0), dim=d)
    return ProblemInstance("sun_vi", {"d": d}, RngSpec(seed), problem, x0,
                           RECOMMENDED_ITERS["sun_vi"])


def make_matrix_game(k: int = 1000, l: int = 2000, dist: str = "uniform",
                     seed: int = 0) -> ProblemInstance:
    """Min-max matrix game on product simplices, as a monotone VI.

    z = (x; y) with x on the l-simplex and y on the k-simplex,
    F(z) = (A^T y; -A x).  One operator evaluation costs two matrix-vector
    products.  ``dist`` picks uniform entries on [-1, 1] or unclipped
    standard normal entries.  Starting point: the two barycenters.
    """
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        A = rng.uniform(-1.0, 1.0, (k, l))
    elif dist == "normal":
        A = rng.standard_normal((k, l))
    else:
        raise ValueError(f"unknown distribution {dist!r}")
    dim = l + k

    def F(z):
        x = z[:l]
        y = z[l:]
        return np.concatenate([A.T @ y, -(A @ x)])

    g = product_prox([(simplex_prox(), slice(0, l)),
                      (simplex_prox(), slice(l, dim))], dim)
    x0 = np.concatenate([np.full(l, 1.0 / l), np.full(k, 1.0 / k)])
    problem = VIProblem(F=MonotoneMap(F, is_affine=True, mult_per_eval=2),
                        g=g, dim=dim)
    return ProblemInstance("matrix_game", {"k": k, "l": l, "dist": dist},
                           RngSpec(seed), problem, x0,
                           RECOMMENDED_ITERS["matrix_game"], metric="gap",
                           data={"A": A})


MAKERS = {
    "cons_min": make_cons_min,
    "geo_prog": make_geo_prog,
    "analytic_center": make_analytic_center,
    "lp_min": make_lp_min,
    "sun_vi": make_sun,
    "matrix_game": make_matrix_game,
}


def finite_diff_grad(f_value: Callable[[Vector], float], x: Vector,
                     h: Optional[float] = None) -> Vector:
    """Central-difference gradient oracle with per-coordinate steps.

    Step h_i = 1e-6 * (1 + |x_i|) unless an explicit h is given.  Raises if
    f is non-finite at a stencil point.
    """
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        hi = h if h is not None else 1e-6 * (1.0 + abs(float(x[i])))
        e = np.zeros_like(x)
        e[i] = hi
        fp = f_value(x + e)
        fm = f_value(x - e)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError(f"f non-finite at finite-difference stencil, coordinate {i}")
        g[i] = (fp - fm) / (2.0 * hi)
    return g
