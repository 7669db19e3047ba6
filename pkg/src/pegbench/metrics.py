"""Convergence measures and the theoretical quantities monitored at runtime.

The natural residual characterizes solutions (it vanishes exactly at a
solution of the VI); the gap integrand Psi and the Lyapunov energies mirror
the quantities that drive the convergence analysis, so tests can check the
corresponding inequalities numerically along solver runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Counters, Vector, VIProblem


def natural_residual(x: Vector, problem: VIProblem, lam: float = 1.0,
                     counters: Optional[Counters] = None) -> float:
    """``||x - prox_{lam g}(x - lam F(x))||``; zero exactly at solutions.

    ``counters`` is meant to be a *shadow* tally: residual evaluation is a
    diagnostic and must not pollute the benchmark counts.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if counters is None:
        counters = Counters()
    Fx = counters.eval_F(problem.F, x)
    if not np.all(np.isfinite(Fx)):
        return math.nan
    p = problem.g.prox(lam, x - lam * Fx)
    counters.n_prox += 1
    return float(np.linalg.norm(x - p))


def psi(problem: VIProblem, x: Vector, y: Vector) -> float:
    """Dual-gap integrand Psi(x, y) = <F(x), y - x> + g(y) - g(x).

    Returns +inf when y lies outside dom g (indicator convention of the
    ProxFriendly value evaluators).
    """
    g_y = problem.g.value(y)
    if not math.isfinite(g_y):
        return math.inf
    g_x = problem.g.value(x)
    Fx = problem.F(x)
    return float(np.dot(Fx, y - x)) + g_y - g_x


@dataclass
class GapReport:
    value: float
    certificate: str


def matrix_game_gap(A: np.ndarray, x: Vector, y: Vector,
                    feas_tol: float = 1e-9) -> GapReport:
    """Primal-dual gap max_i (Ax)_i - min_j (A^T y)_j of a matrix game.

    Both points must lie on their simplices to within ``feas_tol``; the
    certificate names the maximizing row and minimizing column.
    """
    for v, d, label in ((x, A.shape[1], "x"), (y, A.shape[0], "y")):
        if v.shape[0] != d:
            raise ValueError(f"{label} has wrong dimension")
        if abs(float(np.sum(v)) - 1.0) > feas_tol or np.min(v) < -feas_tol:
            raise ValueError(f"{label} is not on its simplex (tol {feas_tol:g})")
    Ax = A @ x
    ATy = A.T @ y
    i = int(np.argmax(Ax))
    j = int(np.argmin(ATy))
    return GapReport(value=float(Ax[i] - ATy[j]), certificate=f"row {i}, col {j}")


def lyapunov_energy(snapshot, x_ref: Vector, problem, variant: str = "alg12",
                    phi_star: Optional[float] = None) -> float:
    """Lyapunov energy a_{n+1} of the convergence analysis.

    ``variant="alg12"``:
        ||x_{n+1} - x_ref||^2 + alpha ||x_{n+1} - y_n||^2
        + 2 lambda_n (1 + tau_n) Psi(x_ref, x_n)
    ``variant="alg3"`` (composite problems; needs the optimal value):
        ||x_{n+1} - x_ref||^2 + (2 theta - 1) alpha ||x_{n+1} - y_n||^2
        + 2 lambda_n (1 + theta tau_n) (Phi(x_n) - phi_star)

    ``snapshot`` is an iterate snapshot from a solver hook (fields x,
    x_next, y, lam, tau, alpha, theta).
    """
    d2 = float(np.dot(snapshot.x_next - x_ref, snapshot.x_next - x_ref))
    inertia = float(np.dot(snapshot.x_next - snapshot.y, snapshot.x_next - snapshot.y))
    if variant == "alg12":
        vi = problem if isinstance(problem, VIProblem) else problem.to_vi()
        gap = psi(vi, x_ref, snapshot.x)
        return d2 + snapshot.alpha * inertia + 2.0 * snapshot.lam * (1.0 + snapshot.tau) * gap
    if variant == "alg3":
        if phi_star is None:
            raise ValueError("alg3 energy needs the optimal value phi_star")
        theta = snapshot.theta
        if theta is None:
            raise ValueError("snapshot lacks theta; was it produced by alg3?")
        phi_xn = problem.objective(snapshot.x)
        return (d2 + (2.0 * theta - 1.0) * snapshot.alpha * inertia
                + 2.0 * snapshot.lam * (1.0 + theta * snapshot.tau) * (phi_xn - phi_star))
    raise ValueError(f"unknown variant {variant!r}")


def ergodic_bound_rhs(x: Vector, run_init, problem) -> float:
    """Numerator of the ergodic gap bound; divide by the ergodic weight.

    ``run_init`` is the anchor snapshot recorded by a solver run: fields
    x1, y0, lam1, tau1, x0 and alpha.  The bound reads

        Psi(x, xbar_N) <= (||x1 - x||^2 + alpha ||x1 - y0||^2
                           + 2 lam1 tau1 Psi(x, x0)) / weight_N.
    """
    vi = problem if isinstance(problem, VIProblem) else problem.to_vi()
    d1 = x - run_init.x1
    d0 = run_init.x1 - run_init.y0
    psi0 = psi(vi, x, run_init.x0)
    return (float(np.dot(d1, d1)) + run_init.alpha * float(np.dot(d0, d0))
            + 2.0 * run_init.lam1 * run_init.tau1 * psi0)
