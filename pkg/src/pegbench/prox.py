"""Exact proximal and projection operators for the benchmark regularizers.

All projections are pure functions.  :class:`ProxFriendly` packages a prox
evaluator together with the value of g and the flags solvers care about
(indicator / affine domain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Vector

# indicator membership tolerance, relative to the point's magnitude
_FEAS_TOL = 1e-8


def project_ball(v: Vector, radius: float) -> Vector:
    """Euclidean projection onto the ball {x : ||x|| <= radius}."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    nrm = float(np.linalg.norm(v))
    if nrm <= radius:
        return v.copy()
    return v * (radius / nrm)


@dataclass
class BoxBounds:
    """Componentwise bounds, scalars broadcast."""

    lo: float | Vector
    hi: float | Vector

    def __post_init__(self):
        if np.any(np.asarray(self.lo) > np.asarray(self.hi)):
            raise ValueError("box bounds need lo <= hi componentwise")


def project_box(v: Vector, b: BoxBounds) -> Vector:
    """Componentwise clamp onto [lo, hi]."""
    return np.clip(v, b.lo, b.hi)


def project_simplex(v: Vector) -> Vector:
    """Euclidean projection onto the unit simplex.

    Sort-and-threshold rule: with u the coordinates sorted in decreasing
    order, find the largest k with u_k - (sum_{j<=k} u_j - 1)/k > 0, set
    tau to that partial-sum expression and output max(v - tau, 0).
    """
    if v.size == 0:
        raise ValueError("empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    cond = u - (css - 1.0) / ks > 0.0
    k = int(np.nonzero(cond)[0][-1]) + 1  # cond[0] is always true
    tau = (css[k - 1] - 1.0) / k
    return np.maximum(v - tau, 0.0)


def soft_threshold(v: Vector, lam: float) -> Vector:
    """Prox of lam * ||.||_1, the componentwise shrinkage operator."""
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


class ProxFriendly:
    """Convex function g with an exact prox operator.

    ``prox(lam, v)`` evaluates prox_{lam g}(v); ``value`` is g itself with
    extended-real range (indicators return inf outside their set, within a
    small relative feasibility tolerance).  ``domain_affine`` marks g whose
    effective domain is an affine set (here: g identically zero), which
    lets the projected solver drop its stepsize bounds.
    """

    def __init__(self, prox: Callable[[float, Vector], Vector],
                 value: Callable[[Vector], float], *,
                 is_indicator: bool = False, domain_affine: bool = False,
                 name: str = "g"):
        self.prox = prox
        self.value = value
        self.is_indicator = bool(is_indicator)
        self.domain_affine = bool(domain_affine)
        self.name = name

    def __repr__(self):
        return f"ProxFriendly({self.name})"


def _indicator_value(project: Callable[[Vector], Vector]) -> Callable[[Vector], float]:
    def value(v: Vector) -> float:
        p = project(v)
        if np.linalg.norm(v - p) <= _FEAS_TOL * (1.0 + np.linalg.norm(v)):
            return 0.0
        return math.inf
    return value


def zero_prox() -> ProxFriendly:
    """g = 0: prox is the identity; the domain is the whole (affine) space."""
    return ProxFriendly(lambda lam, v: v.copy(), lambda v: 0.0,
                        is_indicator=False, domain_affine=True, name="zero")


def ball_prox(radius: float) -> ProxFriendly:
    proj = lambda v: project_ball(v, radius)
    return ProxFriendly(lambda lam, v: proj(v), _indicator_value(proj),
                        is_indicator=True, name=f"ball({radius:g})")


def box_prox(lo, hi) -> ProxFriendly:
    b = BoxBounds(lo, hi)
    proj = lambda v: project_box(v, b)
    return ProxFriendly(lambda lam, v: proj(v), _indicator_value(proj),
                        is_indicator=True, name="box")


def simplex_prox() -> ProxFriendly:
    return ProxFriendly(lambda lam, v: project_simplex(v),
                        _indicator_value(project_simplex),
                        is_indicator=True, name="simplex")


def l1_prox(weight: float = 1.0) -> ProxFriendly:
    """g(x) = weight * ||x||_1."""
    if weight < 0.0:
        raise ValueError("weight must be nonnegative")
    return ProxFriendly(lambda lam, v: soft_threshold(v, lam * weight),
                        lambda v: weight * float(np.sum(np.abs(v))),
                        is_indicator=False, name="l1")


def prox_product(blocks: Sequence[tuple[ProxFriendly, slice]], lam: float,
                 v: Vector) -> Vector:
    """Apply block proxes independently on a partition of the coordinates.

    The blocks must partition the dimension exactly.  By the benchmark
    counting convention a product prox counts as a single prox call, which
    holds automatically because solvers count calls, not blocks.
    """
    _check_partition(blocks, v.size)
    out = np.empty_like(v)
    for g, sl in blocks:
        out[sl] = g.prox(lam, v[sl])
    return out


def _check_partition(blocks: Sequence[tuple[ProxFriendly, slice]], dim: int) -> None:
    seen = np.zeros(dim, dtype=bool)
    for _, sl in blocks:
        idx = np.arange(dim)[sl]
        if np.any(seen[idx]):
            raise ValueError("overlapping prox blocks")
        seen[idx] = True
    if not np.all(seen):
        raise ValueError("prox blocks do not cover the dimension")


def product_prox(blocks: Sequence[tuple[ProxFriendly, slice]], dim: int) -> ProxFriendly:
    """ProxFriendly wrapper around :func:`prox_product`."""
    blocks = list(blocks)
    _check_partition(blocks, dim)

    def value(v: Vector) -> float:
        return float(sum(g.value(v[sl]) for g, sl in blocks))

    return ProxFriendly(lambda lam, v: prox_product(blocks, lam, v), value,
                        is_indicator=all(g.is_indicator for g, _ in blocks),
                        domain_affine=all(g.domain_affine for g, _ in blocks),
                        name="product")
