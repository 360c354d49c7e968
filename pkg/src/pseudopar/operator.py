"""The sixth-order operator ``V u = sum_{i,j<=3} a_ij D_x^i D_y^j u`` with ``a_33 = 1``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expr import Expr, ExprDomainError, parse
from .grid import Grid, GridFunction2D, diff2d, sample
from .norms import lp_norm_2d, mixed_norm, parse_exponent

__all__ = [
    "CoefficientField",
    "CoefficientError",
    "CoefficientEntry",
    "CoefficientClassReport",
    "required_class",
    "validate_coefficients",
    "apply_V33",
]

FREE_INDICES = tuple((i, j) for i in range(4) for j in range(4) if (i, j) != (3, 3))


class CoefficientError(ValueError):
    def __init__(self, index: tuple[int, int], message: str):
        super().__init__(f"coefficient a_{index[0]},{index[1]}: {message}")
        self.index = index


def _parse_key(key) -> tuple[int, int]:
    if isinstance(key, str):
        try:
            i, j = (int(s) for s in key.split(","))
        except ValueError:
            raise CoefficientError((-1, -1), f"bad key {key!r}, expected 'i,j'") from None
    else:
        i, j = key
    if not (0 <= i <= 3 and 0 <= j <= 3):
        raise CoefficientError((i, j), "indices must lie in 0..3")
    if (i, j) == (3, 3):
        raise CoefficientError((3, 3), "the principal coefficient is fixed to 1")
    return i, j


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Lower-order coefficients; omitted entries are zero, ``a_33`` is always 1.

    Values may be expression text, parsed :class:`Expr`, numbers, or sampled
    :class:`GridFunction2D`. Keys are ``(i, j)`` tuples or ``"i,j"`` strings.
    """

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        terms = {}
        for key, value in dict(self.terms).items():
            ij = _parse_key(key)
            if isinstance(value, str):
                value = parse(value)
            terms[ij] = value
        object.__setattr__(self, "terms", terms)

    @classmethod
    def principal(cls) -> "CoefficientField":
        return cls({})

    def __getitem__(self, ij) -> Expr | GridFunction2D | float:
        ij = tuple(ij)
        if ij == (3, 3):
            return 1.0
        return self.terms.get(ij, 0.0)

    def samples(self, grid: Grid, ij: tuple[int, int]) -> np.ndarray:
        """Nodal values of one coefficient; raises :class:`CoefficientError`."""
        value = self[ij]
        if isinstance(value, GridFunction2D):
            if value.grid != grid:
                raise CoefficientError(ij, "sampled on a different grid")
            vals = value.values
        elif isinstance(value, Expr):
            try:
                vals = sample(value, grid).values
            except ExprDomainError as exc:
                raise CoefficientError(ij, str(exc)) from exc
        else:
            vals = np.full((grid.nx, grid.ny), float(value))
        if not np.all(np.isfinite(vals)):
            raise CoefficientError(ij, "non-finite sample")
        return vals

    def active(self) -> list[tuple[int, int]]:
        """Indices of coefficients that are not the literal zero."""
        out = []
        for ij in FREE_INDICES:
            v = self.terms.get(ij, 0.0)
            if isinstance(v, (int, float)) and v == 0:
                continue
            out.append(ij)
        return out


def required_class(ij: tuple[int, int]) -> str:
    i, j = ij
    if i == 3:
        return "L_inf,p"
    if j == 3:
        return "L_p,inf"
    return "L_p"


@dataclass(frozen=True)
class CoefficientEntry:
    index: tuple[int, int]
    required: str
    norm: float
    finite: bool
    error: str | None = None


@dataclass(frozen=True)
class CoefficientClassReport:
    entries: tuple[CoefficientEntry, ...]
    p: float

    @property
    def ok(self) -> bool:
        return all(e.finite for e in self.entries)

    def __getitem__(self, ij) -> CoefficientEntry:
        ij = tuple(ij)
        for e in self.entries:
            if e.index == ij:
                return e
        raise KeyError(ij)

    def render(self) -> str:
        lines = [f"coefficient classes (p = {self.p:g})"]
        for e in self.entries:
            status = "ok" if e.finite else f"NOT FINITE ({e.error})" if e.error else "NOT FINITE"
            lines.append(f"  a_{e.index[0]},{e.index[1]}  {e.required:<8} norm = {e.norm:.6g}  {status}")
        return "\n".join(lines)


def validate_coefficients(a: CoefficientField, grid: Grid, p=2) -> CoefficientClassReport:
    """Discrete class norms of the fifteen free coefficients.

    Diagnostic only: a finite grid norm cannot certify membership in the
    class, so the report flags but never rejects.
    """
    p = parse_exponent(p)
    entries = []
    for ij in FREE_INDICES:
        cls_name = required_class(ij)
        try:
            vals = a.samples(grid, ij)
        except CoefficientError as exc:
            entries.append(CoefficientEntry(ij, cls_name, math.inf, False, str(exc)))
            continue
        f = GridFunction2D(grid, vals)
        if cls_name == "L_p":
            norm = lp_norm_2d(f, p)
        elif cls_name == "L_inf,p":
            norm = mixed_norm(f, "x", p)
        else:
            norm = mixed_norm(f, "y", p)
        entries.append(CoefficientEntry(ij, cls_name, norm, bool(np.isfinite(norm))))
    return CoefficientClassReport(tuple(entries), p)


def apply_V33(a: CoefficientField, u: GridFunction2D) -> GridFunction2D:
    """Nodewise ``sum a_ij D_x^i D_y^j u``; literal-zero terms are skipped."""
    out = diff2d(u, 3, 3).values.copy()
    for ij in a.active():
        out += a.samples(u.grid, ij) * diff2d(u, *ij).values
    return GridFunction2D(u.grid, out)
