"""Boundary data on all of the boundary: classical and non-classical forms.

Classical data are the six edge functions

    phi1(y) = u(0, y)     psi1(x) = u(x, 0)
    phi2(y) = u(h1, y)    psi2(x) = u(x, h2)
    phi3(y) = u_x(0, y)   psi3(x) = u_y(x, 0)

Non-classical data are fourteen corner derivatives of ``u`` and six
third-derivative edge traces (names follow ``z{i}{j}`` for ``D_x^i D_y^j``
at the origin, ``zh1_*`` at ``(h1, 0)`` and ``zh2_*`` at ``(0, h2)``).

Going from non-classical to classical uses the Taylor formula with integral
remainder, e.g. ``phi1(y) = z00 + y z01 + y^2/2 z02 + 1/2 int_0^y (y-s)^2 z03(s) ds``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction1D, GridFunction2D, diff2d, volterra_integrals

__all__ = [
    "ClassicalBoundaryData",
    "NonClassicalBoundaryData",
    "Residual",
    "AgreementReport",
    "AGREEMENT_CONDITIONS",
    "CLASSICAL_NAMES",
    "SCALAR_NAMES",
    "TRACE_NAMES",
    "TRACE_AXES",
    "agreement_check",
    "classical_to_nonclassical",
    "nonclassical_to_classical",
    "traces_from_solution",
    "max_deviation",
]

CLASSICAL_NAMES = ("phi1", "phi2", "phi3", "psi1", "psi2", "psi3")
CLASSICAL_AXES = {"phi1": "y", "phi2": "y", "phi3": "y", "psi1": "x", "psi2": "x", "psi3": "x"}

SCALAR_NAMES = (
    "z00", "z01", "z02",
    "z10", "z11", "z12",
    "z20", "z21",
    "zh1_00", "zh1_01", "zh1_02",
    "zh2_00", "zh2_10", "zh2_20",
)
TRACE_NAMES = ("z03", "z13", "zh1_03", "z30", "z31", "zh2_30")
TRACE_AXES = {"z03": "y", "z13": "y", "zh1_03": "y", "z30": "x", "z31": "x", "zh2_30": "x"}


@dataclass(frozen=True, eq=False)
class ClassicalBoundaryData:
    phi1: GridFunction1D
    phi2: GridFunction1D
    phi3: GridFunction1D
    psi1: GridFunction1D
    psi2: GridFunction1D
    psi3: GridFunction1D

    def __post_init__(self):
        grid = self.phi1.grid
        for name in CLASSICAL_NAMES:
            g = getattr(self, name)
            if g.axis != CLASSICAL_AXES[name]:
                raise ValueError(f"{name} must live on the {CLASSICAL_AXES[name]}-axis, got {g.axis}")
            if g.grid != grid:
                raise ValueError(f"{name} is sampled on a different grid")

    @property
    def grid(self) -> Grid:
        return self.phi1.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "ClassicalBoundaryData":
        return cls(**{n: GridFunction1D(grid, CLASSICAL_AXES[n], np.zeros(grid.count(CLASSICAL_AXES[n])))
                      for n in CLASSICAL_NAMES})

    def items(self):
        return [(n, getattr(self, n)) for n in CLASSICAL_NAMES]

    def map(self, fn) -> "ClassicalBoundaryData":
        """Apply ``fn`` to every sample array; returns new data."""
        return ClassicalBoundaryData(**{n: GridFunction1D(g.grid, g.axis, fn(g.values)) for n, g in self.items()})

    def combine(self, other: "ClassicalBoundaryData", alpha: float = 1.0, beta: float = 1.0):
        return ClassicalBoundaryData(**{
            n: GridFunction1D(g.grid, g.axis, alpha * g.values + beta * getattr(other, n).values)
            for n, g in self.items()
        })


@dataclass(frozen=True, eq=False)
class NonClassicalBoundaryData:
    z00: float
    z01: float
    z02: float
    z10: float
    z11: float
    z12: float
    z20: float
    z21: float
    zh1_00: float
    zh1_01: float
    zh1_02: float
    zh2_00: float
    zh2_10: float
    zh2_20: float
    z03: GridFunction1D
    z13: GridFunction1D
    zh1_03: GridFunction1D
    z30: GridFunction1D
    z31: GridFunction1D
    zh2_30: GridFunction1D
    # |first source - second source| for corner values the classical data
    # determine twice; filled in by classical_to_nonclassical only.
    discrepancies: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in SCALAR_NAMES:
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"scalar {name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        grid = self.z03.grid
        for name in TRACE_NAMES:
            g = getattr(self, name)
            if g.axis != TRACE_AXES[name]:
                raise ValueError(f"{name} must live on the {TRACE_AXES[name]}-axis, got {g.axis}")
            if g.grid != grid:
                raise ValueError(f"{name} is sampled on a different grid")

    @property
    def grid(self) -> Grid:
        return self.z03.grid

    @property
    def scalars(self) -> dict[str, float]:
        return {n: getattr(self, n) for n in SCALAR_NAMES}

    @property
    def traces(self) -> dict[str, GridFunction1D]:
        return {n: getattr(self, n) for n in TRACE_NAMES}

    @classmethod
    def zeros(cls, grid: Grid) -> "NonClassicalBoundaryData":
        return cls(**{n: 0.0 for n in SCALAR_NAMES},
                   **{n: GridFunction1D(grid, TRACE_AXES[n], np.zeros(grid.count(TRACE_AXES[n])))
                      for n in TRACE_NAMES})

    def magnitude(self) -> float:
        """Largest absolute scalar or trace sample."""
        vals = [abs(v) for v in self.scalars.values()]
        vals += [float(np.abs(g.values).max()) for g in self.traces.values()]
        return max(vals)


def max_deviation(a: NonClassicalBoundaryData, b: NonClassicalBoundaryData) -> dict[str, float]:
    """Per-entry deviation: absolute for scalars, sup-norm for traces."""
    out = {n: abs(getattr(a, n) - getattr(b, n)) for n in SCALAR_NAMES}
    out.update({n: float(np.abs(getattr(a, n).values - getattr(b, n).values).max()) for n in TRACE_NAMES})
    return out


@dataclass(frozen=True)
class Residual:
    name: str
    left: float
    right: float

    @property
    def difference(self) -> float:
        return abs(self.left - self.right)


@dataclass(frozen=True)
class AgreementReport:
    residuals: tuple[Residual, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(r.difference <= self.tol for r in self.residuals)

    @property
    def failed(self) -> list[str]:
        return [r.name for r in self.residuals if r.difference > self.tol]

    @property
    def max_difference(self) -> float:
        return max(r.difference for r in self.residuals)

    def __getitem__(self, name: str) -> Residual:
        for r in self.residuals:
            if r.name == name:
                return r
        raise KeyError(name)

    def render(self) -> str:
        lines = [f"{'condition':<22} {'left':>24} {'right':>24} {'|diff|':>12}"]
        for r in self.residuals:
            flag = "" if r.difference <= self.tol else "  FAIL"
            lines.append(f"{r.name:<22} {r.left:>24.16g} {r.right:>24.16g} {r.difference:>12.3e}{flag}")
        lines.append(f"tol = {self.tol:g}: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


AGREEMENT_CONDITIONS = (
    "phi1(h2)=psi2(0)",
    "phi3(0)=psi1'(0)",
    "phi1(0)=psi1(0)",
    "phi3(h2)=psi2'(0)",
    "psi1(h1)=phi2(0)",
    "phi3'(0)=psi3'(0)",
    "phi2(h2)=psi2(h1)",
    "psi3(0)=phi1'(0)",
    "psi3(h1)=phi2'(0)",
)


def _d(g: GridFunction1D, k: int, index: int) -> float:
    return g.derivative_at(k, index)


def agreement_check(c: ClassicalBoundaryData, tol: float = 1e-6) -> AgreementReport:
    """The nine corner compatibility conditions of the classical data.

    Derivatives at the corners come from the one-sided grid stencils.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    e = -1
    pairs = (
        (_d(c.phi1, 0, e), _d(c.psi2, 0, 0)),
        (_d(c.phi3, 0, 0), _d(c.psi1, 1, 0)),
        (_d(c.phi1, 0, 0), _d(c.psi1, 0, 0)),
        (_d(c.phi3, 0, e), _d(c.psi2, 1, 0)),
        (_d(c.psi1, 0, e), _d(c.phi2, 0, 0)),
        (_d(c.phi3, 1, 0), _d(c.psi3, 1, 0)),
        (_d(c.phi2, 0, e), _d(c.psi2, 0, e)),
        (_d(c.psi3, 0, 0), _d(c.phi1, 1, 0)),
        (_d(c.psi3, 0, e), _d(c.phi2, 1, 0)),
    )
    return AgreementReport(tuple(Residual(n, l, r) for n, (l, r) in zip(AGREEMENT_CONDITIONS, pairs)), tol)


def classical_to_nonclassical(c: ClassicalBoundaryData) -> NonClassicalBoundaryData:
    """Corner values and third-derivative traces of the classical data.

    Where two edge functions determine the same corner quantity, the first
    one listed below is used and ``|first - second|`` is recorded in
    ``discrepancies``.
    """
    s = {
        "z00": (_d(c.phi1, 0, 0), _d(c.psi1, 0, 0)),
        "z01": (_d(c.phi1, 1, 0), _d(c.psi3, 0, 0)),
        "z02": (_d(c.phi1, 2, 0), None),
        "z10": (_d(c.phi3, 0, 0), _d(c.psi1, 1, 0)),
        "z11": (_d(c.phi3, 1, 0), _d(c.psi3, 1, 0)),
        "z12": (_d(c.phi3, 2, 0), None),
        "z20": (_d(c.psi1, 2, 0), None),
        "z21": (_d(c.psi3, 2, 0), None),
        "zh1_00": (_d(c.phi2, 0, 0), _d(c.psi1, 0, -1)),
        "zh1_01": (_d(c.phi2, 1, 0), _d(c.psi3, 0, -1)),
        "zh1_02": (_d(c.phi2, 2, 0), None),
        "zh2_00": (_d(c.psi2, 0, 0), _d(c.phi1, 0, -1)),
        "zh2_10": (_d(c.psi2, 1, 0), _d(c.phi3, 0, -1)),
        "zh2_20": (_d(c.psi2, 2, 0), None),
    }
    traces = {
        "z03": c.phi1.diff(3),
        "z13": c.phi3.diff(3),
        "zh1_03": c.phi2.diff(3),
        "z30": c.psi1.diff(3),
        "z31": c.psi3.diff(3),
        "zh2_30": c.psi2.diff(3),
    }
    disc = {n: abs(a - b) for n, (a, b) in s.items() if b is not None}
    return NonClassicalBoundaryData(**{n: a for n, (a, _) in s.items()}, **traces, discrepancies=disc)


def _taylor(t: np.ndarray, v0: float, v1: float, v2: float, rem: GridFunction1D, method: str) -> np.ndarray:
    return v0 + t * v1 + 0.5 * t**2 * v2 + volterra_integrals(rem, method)


def nonclassical_to_classical(z: NonClassicalBoundaryData, method: str = "product") -> ClassicalBoundaryData:
    """Rebuild the six edge functions from corner data and remainders.

    ``method`` selects the Volterra quadrature (see ``grid.kernel_weights``).
    """
    g = z.grid
    x, y = g.x, g.y

    def line(axis, vals):
        return GridFunction1D(g, axis, vals)

    return ClassicalBoundaryData(
        phi1=line("y", _taylor(y, z.z00, z.z01, z.z02, z.z03, method)),
        phi2=line("y", _taylor(y, z.zh1_00, z.zh1_01, z.zh1_02, z.zh1_03, method)),
        phi3=line("y", _taylor(y, z.z10, z.z11, z.z12, z.z13, method)),
        psi1=line("x", _taylor(x, z.z00, z.z10, z.z20, z.z30, method)),
        psi2=line("x", _taylor(x, z.zh2_00, z.zh2_10, z.zh2_20, z.zh2_30, method)),
        psi3=line("x", _taylor(x, z.z01, z.z11, z.z21, z.z31, method)),
    )


def traces_from_solution(u: GridFunction2D) -> tuple[ClassicalBoundaryData, NonClassicalBoundaryData]:
    """Both kinds of boundary data read off a grid solution."""
    g = u.grid
    needed = ((0, 0), (1, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 0), (2, 1), (0, 3), (1, 3), (3, 0), (3, 1))
    D = {ij: diff2d(u, *ij).values for ij in needed}
    vx = lambda vals: GridFunction1D(g, "x", vals)  # noqa: E731
    vy = lambda vals: GridFunction1D(g, "y", vals)  # noqa: E731
    c = ClassicalBoundaryData(
        phi1=vy(D[0, 0][0, :]),
        phi2=vy(D[0, 0][-1, :]),
        phi3=vy(D[1, 0][0, :]),
        psi1=vx(D[0, 0][:, 0]),
        psi2=vx(D[0, 0][:, -1]),
        psi3=vx(D[0, 1][:, 0]),
    )
    z = NonClassicalBoundaryData(
        z00=D[0, 0][0, 0], z01=D[0, 1][0, 0], z02=D[0, 2][0, 0],
        z10=D[1, 0][0, 0], z11=D[1, 1][0, 0], z12=D[1, 2][0, 0],
        z20=D[2, 0][0, 0], z21=D[2, 1][0, 0],
        zh1_00=D[0, 0][-1, 0], zh1_01=D[0, 1][-1, 0], zh1_02=D[0, 2][-1, 0],
        zh2_00=D[0, 0][0, -1], zh2_10=D[1, 0][0, -1], zh2_20=D[2, 0][0, -1],
        z03=vy(D[0, 3][0, :]),
        z13=vy(D[1, 3][0, :]),
        zh1_03=vy(D[0, 3][-1, :]),
        z30=vx(D[3, 0][:, 0]),
        z31=vx(D[3, 1][:, 0]),
        zh2_30=vx(D[3, 0][:, -1]),
    )
    return c, z
