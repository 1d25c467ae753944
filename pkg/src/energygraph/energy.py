"""Dirichlet energy of node functions and a few derived quantities.

Every sum runs over the stored undirected edges and is accumulated with
``math.fsum``, so results are correctly rounded and independent of edge order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


from .graph import WeightedGraph, as_function

__all__ = [
    "dirichlet_energy",
    "energy_inner_product",
    "energy_of_square",
    "check_sqrt_triangle",
    "TriangleReport",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


def dirichlet_energy(g: WeightedGraph, f) -> float:
    """Return ``(1/2) sum_{x,y} b(x,y) (f(x) - f(y))**2``.

    Each unordered pair is stored once, so this equals the sum over edges of
    ``b * (f(u) - f(v))**2``.
    """
    f = as_function(g, f)
    d = f[g.heads] - f[g.tails]
    return math.fsum(g.weights * d * d)


def energy_inner_product(g: WeightedGraph, f, h) -> float:
    """Bilinear form polarizing the energy: ``(Q(f+h) - Q(f-h)) / 4``.

    Evaluated as the edge sum ``b * df * dh``, which is the same quantity
    without the cancellation of the polarization formula.
    """
    f = as_function(g, f)
    h = as_function(g, h)
    df = f[g.heads] - f[g.tails]
    dh = h[g.heads] - h[g.tails]
    # (df * dh) first so swapping f and h gives the same rounding
    return math.fsum(g.weights * (df * dh))


def energy_of_square(g: WeightedGraph, f) -> float:
    f = as_function(g, f)
    return dirichlet_energy(g, f * f)


@dataclass(frozen=True)
class TriangleReport:
    lhs: float
    rhs: float
    holds: bool


def check_sqrt_triangle(g: WeightedGraph, f, h, tol=DEFAULT_TOL) -> TriangleReport:
    """Compare ``Q(f+h)**0.5`` with ``Q(f)**0.5 + Q(h)**0.5``."""
    f = as_function(g, f)
    h = as_function(g, h)
    lhs = math.sqrt(dirichlet_energy(g, f + h))
    rhs = math.sqrt(dirichlet_energy(g, f)) + math.sqrt(dirichlet_energy(g, h))
    return TriangleReport(lhs, rhs, bool(lhs <= rhs + tol))
