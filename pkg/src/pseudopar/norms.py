"""Discrete norms on grid functions.

Integrals use the (tensor) trapezoid rule; ``p = inf`` is the sample maximum,
which is the grid stand-in for the essential supremum.

Mixed norms pair exponents with variables positionally: in
``L_{q1,q2}^{x,y}`` the exponent ``q1`` governs ``x`` and ``q2`` governs
``y``. The x-norm is always taken last, i.e.
``|| || f(x, .) ||_{L_q2(dy)} ||_{L_q1(dx)}``.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import GridFunction1D, GridFunction2D, diff1d, diff2d, trapezoid_weights

__all__ = [
    "parse_exponent",
    "lp_norm_1d",
    "lp_norm_2d",
    "mixed_norm",
    "sobolev_norm_1d",
    "sobolev_norm_2d",
]


def parse_exponent(p) -> float:
    """Accept a number >= 1, ``math.inf`` or the strings ``"inf"``/``"infinity"``."""
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "∞") else float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent p must satisfy p >= 1, got {p}")
    return p


def _lp(values: np.ndarray, weights: np.ndarray, p: float, axis=None):
    a = np.abs(values)
    if math.isinf(p):
        return a.max(axis=axis)
    if axis is None:
        return float(np.sum(weights * a**p) ** (1.0 / p))
    return np.sum(weights * a**p, axis=axis) ** (1.0 / p)


def lp_norm_1d(g: GridFunction1D, p) -> float:
    p = parse_exponent(p)
    n = g.values.size
    return float(_lp(g.values, trapezoid_weights(n, g.grid.spacing(g.axis)), p))


def lp_norm_2d(f: GridFunction2D, p) -> float:
    p = parse_exponent(p)
    g = f.grid
    w = np.outer(trapezoid_weights(g.nx, g.dx), trapezoid_weights(g.ny, g.dy))
    return float(_lp(f.values, w, p))


def mixed_norm(f: GridFunction2D, sup_axis: str, p) -> float:
    """``L_{inf,p}^{x,y}`` for ``sup_axis="x"``, ``L_{p,inf}^{x,y}`` for ``sup_axis="y"``."""
    p = parse_exponent(p)
    g = f.grid
    if sup_axis == "x":
        inner = _lp(f.values, trapezoid_weights(g.ny, g.dy)[None, :], p, axis=1)
        return float(np.max(inner))
    if sup_axis == "y":
        inner = np.abs(f.values).max(axis=1)
        return float(_lp(inner, trapezoid_weights(g.nx, g.dx), p))
    raise ValueError(f"sup_axis must be 'x' or 'y', got {sup_axis!r}")


def sobolev_norm_1d(g: GridFunction1D, p) -> float:
    """``sum_{j=0..3} ||D^j g||_{L_p}``."""
    p = parse_exponent(p)
    w = trapezoid_weights(g.values.size, g.grid.spacing(g.axis))
    return sum(float(_lp(diff1d(g.values, g.grid, g.axis, j), w, p)) for j in range(4))


def sobolev_norm_2d(u: GridFunction2D, p) -> float:
    """``sum_{i,j=0..3} ||D_x^i D_y^j u||_{L_p(G)}``."""
    p = parse_exponent(p)
    return sum(lp_norm_2d(diff2d(u, i, j), p) for i in range(4) for j in range(4))
