"""Uniform tensor grids, sampled functions, stencils and kernel quadrature.

Every derivative ``D^k`` (k = 1, 2, 3) is realised with a 5-node stencil. At
interior nodes the window is centred; within two nodes of an end it slides
inward so it stays on the grid. All stencils are therefore exact on
polynomials of degree <= 4, and the truncation error is at worst O(h^2)
(third derivative, centred).
"""

from __future__ import annotations

import io
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Rect",
    "Grid",
    "GridFunction1D",
    "GridFunction2D",
    "StencilTable",
    "GridError",
    "MIN_NODES",
    "STENCIL_WIDTH",
    "make_grid",
    "fd_weights",
    "diff_matrix",
    "diff1d",
    "diff2d",
    "kernel_weights",
    "kernel_integral",
    "volterra_integrals",
    "trapezoid_weights",
    "sample",
    "sample_line",
    "write_csv",
    "read_csv",
]

MIN_NODES = 9
STENCIL_WIDTH = 5


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    """The domain ``(0, h1) x (0, h2)``."""

    h1: float = 1.0
    h2: float = 1.0

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise GridError(f"rectangle extents must be positive, got ({self.h1}, {self.h2})")


@dataclass(frozen=True)
class Grid:
    rect: Rect
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < MIN_NODES or self.ny < MIN_NODES:
            raise GridError(f"need at least {MIN_NODES} nodes per axis, got nx={self.nx}, ny={self.ny}")

    @property
    def dx(self) -> float:
        return self.rect.h1 / (self.nx - 1)

    @property
    def dy(self) -> float:
        return self.rect.h2 / (self.ny - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.rect.h1, self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.rect.h2, self.ny)

    def nodes(self, axis: str) -> np.ndarray:
        return self.x if axis == "x" else self.y

    def count(self, axis: str) -> int:
        return self.nx if axis == "x" else self.ny

    def spacing(self, axis: str) -> float:
        return self.dx if axis == "x" else self.dy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape ``(nx, ny)``; first index runs along x."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def stencils(self) -> "StencilTable":
        return StencilTable.build(self)


def make_grid(rect: Rect, nx: int, ny: int) -> Grid:
    return Grid(rect, int(nx), int(ny))


@dataclass(frozen=True, eq=False)
class GridFunction1D:
    """Samples along one axis of ``grid`` (``axis`` is ``"x"`` or ``"y"``)."""

    grid: Grid
    axis: str
    values: np.ndarray

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise GridError(f"axis must be 'x' or 'y', got {self.axis!r}")
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.count(self.axis),):
            raise GridError(f"expected {self.grid.count(self.axis)} samples on {self.axis}, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise GridError("grid function samples must be finite")

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes(self.axis)

    def diff(self, k: int) -> "GridFunction1D":
        return GridFunction1D(self.grid, self.axis, diff1d(self.values, self.grid, self.axis, k))

    def derivative_at(self, k: int, index: int) -> float:
        """``D^k`` at one node, via that node's stencil only."""
        return float(self.grid.stencils.matrix(self.axis, k)[index] @ self.values) if k else float(self.values[index])

    def __add__(self, other):
        other = other.values if isinstance(other, GridFunction1D) else other
        return GridFunction1D(self.grid, self.axis, self.values + other)

    def __mul__(self, c):
        return GridFunction1D(self.grid, self.axis, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class GridFunction2D:
    """Samples at all nodes; ``values[i, j]`` is the value at ``(x_i, y_j)``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1 and vals.size == self.grid.nx * self.grid.ny:
            vals = vals.reshape(self.grid.nx, self.grid.ny)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise GridError(f"expected shape {(self.grid.nx, self.grid.ny)}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise GridError("grid function samples must be finite")

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __add__(self, other):
        other = other.values if isinstance(other, GridFunction2D) else other
        return GridFunction2D(self.grid, self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, GridFunction2D) else other
        return GridFunction2D(self.grid, self.values - other)

    def __mul__(self, c):
        return GridFunction2D(self.grid, self.values * c)

    __rmul__ = __mul__


def fd_weights(order: int, offsets, spacing: float = 1.0) -> np.ndarray:
    """Weights for ``D^order`` at offset 0 from samples at ``offsets * spacing``.

    Uses Fornberg's recursion, which builds the derivatives of the Lagrange
    interpolant through the given nodes. The result is exact for every
    polynomial of degree ``len(offsets) - 1``. The recursion runs in rational
    arithmetic on the (unit-spacing) offsets, so the only rounding is the
    final conversion and the division by ``spacing**order``.
    """
    c = _fd_rational(order, offsets)
    return np.array([float(v) for v in c]) / spacing**order


def _fd_rational(order: int, offsets) -> list[Fraction]:
    z = [Fraction(float(o)) for o in offsets]
    n = len(z)
    if len(set(z)) != n:
        raise GridError(f"stencil offsets must be distinct, got {list(offsets)}")
    if order < 0 or n < order + 1:
        raise GridError(f"{n} nodes cannot resolve derivative order {order}")
    c = [[Fraction(0)] * (order + 1) for _ in range(n)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = z[0]
    for i in range(1, n):
        mn = min(i, order)
        c2 = Fraction(1)
        c5 = c4
        c4 = z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return [row[order] for row in c]


def _window(index: int, n: int) -> np.ndarray:
    start = min(max(index - STENCIL_WIDTH // 2, 0), n - STENCIL_WIDTH)
    return np.arange(start, start + STENCIL_WIDTH)


def diff_matrix(n: int, spacing: float, k: int) -> np.ndarray:
    """Dense ``n x n`` matrix applying ``D^k`` with sliding 5-node windows."""
    if k == 0:
        return np.eye(n)
    D = np.zeros((n, n))
    for i in range(n):
        cols = _window(i, n)
        D[i, cols] = fd_weights(k, cols - i, spacing)
    return D


@dataclass(frozen=True)
class StencilTable:
    """Per-axis, per-node stencils for ``D^1 .. D^3``.

    ``offsets[axis][k][i]`` and ``weights[axis][k][i]`` give the stencil for
    node ``i``; ``matrix(axis, k)`` is the same data as a dense operator.
    """

    offsets: dict = field(repr=False)
    weights: dict = field(repr=False)
    matrices: dict = field(repr=False)
    extended: dict = field(repr=False, default_factory=dict)

    @classmethod
    def build(cls, grid: Grid) -> "StencilTable":
        offsets, weights, matrices, extended = {}, {}, {}, {}
        for axis in ("x", "y"):
            n, h = grid.count(axis), grid.spacing(axis)
            offsets[axis], weights[axis], matrices[axis], extended[axis] = {}, {}, {}, {}
            for k in (1, 2, 3):
                offs = [_window(i, n) - i for i in range(n)]
                offsets[axis][k] = offs
                weights[axis][k] = [fd_weights(k, o, h) for o in offs]
                D = np.zeros((n, n))
                for i, (o, w) in enumerate(zip(offs, weights[axis][k])):
                    D[i, o + i] = w
                D.setflags(write=False)
                matrices[axis][k] = D
                # same stencils in extended precision, used by diff2d
                E = np.zeros((n, n), dtype=np.longdouble)
                scale = np.longdouble(1) / np.longdouble(h) ** k
                for i, o in enumerate(offs):
                    r = _fd_rational(k, o)
                    E[i, o + i] = [np.longdouble(v.numerator) / np.longdouble(v.denominator) * scale for v in r]
                E.setflags(write=False)
                extended[axis][k] = E
        return cls(offsets, weights, matrices, extended)

    def matrix(self, axis: str, k: int) -> np.ndarray:
        if k == 0:
            return np.eye(len(self.offsets[axis][1]))
        return self.matrices[axis][k]


def diff1d(values: np.ndarray, grid: Grid, axis: str, k: int) -> np.ndarray:
    if k == 0:
        return np.array(values, dtype=float)
    return grid.stencils.matrix(axis, k) @ values


def diff2d(f: GridFunction2D, i: int, j: int) -> GridFunction2D:
    """``D_x^i D_y^j f``; x stencils are applied first, then y stencils."""
    if not (0 <= i <= 3 and 0 <= j <= 3):
        raise GridError(f"derivative orders must lie in 0..3, got ({i}, {j})")
    if not (i or j):
        return GridFunction2D(f.grid, f.values)
    # Mixed high orders multiply the two stencil amplifications (up to
    # ~1e10 for D_x^3 D_y^3), so the products are accumulated in extended
    # precision and rounded once at the end.
    st = f.grid.stencils
    g = f.values.astype(np.longdouble)
    if i:
        g = st.extended["x"][i] @ g
    if j:
        g = g @ st.extended["y"][j].T
    return GridFunction2D(f.grid, g.astype(float))


def trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    w = np.full(n, spacing)
    w[0] = w[-1] = spacing / 2
    return w


def kernel_weights(nodes: np.ndarray, m: int, method: str = "product") -> np.ndarray:
    """Weights ``w`` with ``w @ Z[:m+1] ~ 1/2 * int_0^{t_m} (t_m - s)^2 Z(s) ds``.

    ``method="product"`` integrates the kernel exactly against the
    piecewise-linear interpolant of the samples (exact when ``Z`` is
    piecewise linear on the grid). ``method="trapezoid"`` is the composite
    trapezoid rule on the product of kernel and samples.
    """
    t = np.asarray(nodes, dtype=float)[: m + 1]
    w = np.zeros(m + 1)
    if m == 0:
        return w
    if method == "trapezoid":
        h = t[1] - t[0]
        w[:] = 0.5 * (t[m] - t) ** 2 * trapezoid_weights(m + 1, h)
        return w
    if method != "product":
        raise GridError(f"unknown quadrature method {method!r}")
    for k in range(m):
        # s = t_m - tau runs from a (at tau_{k+1}) to b (at tau_k)
        a, b = t[m] - t[k + 1], t[m] - t[k]
        h = b - a
        s3 = (b**3 - a**3) / 3.0
        s4 = (b**4 - a**4) / 4.0
        w[k + 1] += 0.5 * (b * s3 - s4) / h
        w[k] += 0.5 * (s4 - a * s3) / h
    return w


def kernel_integral(Z: GridFunction1D, m: int, power: int = 2, method: str = "product") -> float:
    """``1/2 * int_0^{t_m} (t_m - s)^2 Z(s) ds`` over nodes ``0..m`` of ``Z``'s axis."""
    if power != 2:
        raise GridError("only the quadratic kernel is supported")
    n = Z.grid.count(Z.axis)
    if not 0 <= m < n:
        raise GridError(f"upper index {m} outside 0..{n - 1}")
    return float(kernel_weights(Z.nodes, m, method) @ Z.values[: m + 1])


def volterra_integrals(Z: GridFunction1D, method: str = "product") -> np.ndarray:
    """``kernel_integral(Z, m)`` for every node ``m`` of the axis."""
    nodes = Z.nodes
    return np.array([kernel_weights(nodes, m, method) @ Z.values[: m + 1] for m in range(nodes.size)])


def sample(expr, grid: Grid) -> GridFunction2D:
    """Evaluate an expression (or callable of x, y) at all grid nodes."""
    X, Y = grid.mesh()
    vals = expr(X, Y) if callable(expr) else expr
    return GridFunction2D(grid, np.broadcast_to(np.asarray(vals, dtype=float), X.shape))


def sample_line(expr, grid: Grid, axis: str) -> GridFunction1D:
    """Evaluate a one-variable expression along ``axis``.

    The expression receives the axis coordinate under its own name: ``x`` on
    the x-axis (with ``y = 0``), ``y`` on the y-axis (with ``x = 0``).
    """
    t = grid.nodes(axis)
    zeros = np.zeros_like(t)
    vals = expr(t, zeros) if axis == "x" else expr(zeros, t)
    return GridFunction1D(grid, axis, np.broadcast_to(np.asarray(vals, dtype=float), t.shape))


def write_csv(f: GridFunction2D, path=None) -> str:
    """Serialise as ``x,y,value`` rows, x-index major, 17 significant digits."""
    X, Y = f.grid.mesh()
    buf = io.StringIO()
    buf.write("x,y,value\n")
    for xv, yv, v in zip(X.reshape(-1), Y.reshape(-1), f.values.reshape(-1)):
        buf.write(f"{xv:.17g},{yv:.17g},{v:.17g}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path) -> GridFunction2D:
    """Inverse of :func:`write_csv`; the grid is inferred from the coordinates."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    grid = make_grid(Rect(float(xs[-1]), float(ys[-1])), xs.size, ys.size)
    if data.shape[0] != xs.size * ys.size:
        raise GridError(f"{path}: {data.shape[0]} rows do not form a {xs.size}x{ys.size} grid")
    return GridFunction2D(grid, data[:, 2].reshape(xs.size, ys.size))
