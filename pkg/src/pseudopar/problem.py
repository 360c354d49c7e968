"""JSON problem files.

A problem file looks like::

    {
      "domain": {"h1": 1, "h2": 1},
      "grid": {"nx": 21, "ny": 21},
      "p": 2,
      "coefficients": {"0,0": "step(x-0.5)"},
      "rhs": "36",
      "manufactured": {"u_exact": "x^3*y^3"}
    }

with exactly one of ``classical``, ``nonclassical`` or ``manufactured``.
Edge functions and traces are expression strings in their own variable
(``y`` for phi*, z03, z13, zh1_03; ``x`` for psi*, z30, z31, zh2_30) or
arrays of samples; non-classical scalars are numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .boundary import (
    CLASSICAL_AXES,
    CLASSICAL_NAMES,
    SCALAR_NAMES,
    TRACE_AXES,
    TRACE_NAMES,
    ClassicalBoundaryData,
    NonClassicalBoundaryData,
)
from .expr import Expr, ExprDomainError, ExprSyntaxError, parse
from .grid import Grid, GridError, GridFunction1D, Rect, make_grid, sample_line
from .norms import parse_exponent
from .operator import CoefficientError, CoefficientField
from .solver import ManufacturedCase, ProblemSpec

__all__ = ["ProblemFile", "ProblemError", "load_problem", "parse_problem", "classical_block", "nonclassical_block"]

DATA_BLOCKS = ("classical", "nonclassical", "manufactured")


class ProblemError(ValueError):
    """The problem file is malformed; the message names the offending entry."""


@dataclass(frozen=True, eq=False)
class ProblemFile:
    doc: dict
    grid: Grid
    p: float
    coefficients: CoefficientField
    rhs: Expr | None
    kind: str
    data: ClassicalBoundaryData | NonClassicalBoundaryData | None
    manufactured: ManufacturedCase | None

    def spec(self, nonclassical: bool = False) -> ProblemSpec:
        """The solvable problem; manufactured files derive their data here."""
        if self.kind == "manufactured":
            return self.manufactured.spec(self.grid, nonclassical)
        if self.rhs is None:
            raise ProblemError("'rhs' is required to solve a problem without a manufactured solution")
        return ProblemSpec(self.grid, self.coefficients, self.rhs, self.data)


def _expr(text, where: str) -> Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ProblemError(f"{where}: expected an expression string, got {type(text).__name__}")
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        raise ProblemError(f"{where}: {exc}") from exc


def _line(value, grid: Grid, axis: str, where: str) -> GridFunction1D:
    if isinstance(value, list):
        try:
            return GridFunction1D(grid, axis, np.asarray(value, dtype=float))
        except (GridError, ValueError) as exc:
            raise ProblemError(f"{where}: {exc}") from exc
    e = _expr(value, where)
    other = "y" if axis == "x" else "x"
    if other in e.variables():
        raise ProblemError(f"{where}: function of {axis} may not use {other}")
    try:
        return sample_line(e, grid, axis)
    except (ExprDomainError, GridError) as exc:
        raise ProblemError(f"{where}: {exc}") from exc


def _scalar(value, where: str) -> float:
    if isinstance(value, str):
        e = _expr(value, where)
        if e.variables():
            raise ProblemError(f"{where}: scalar may not depend on x or y")
        value = e.evaluate(0.0, 0.0)
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ProblemError(f"{where}: expected a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ProblemError(f"{where}: must be finite")
    return v


def _require(block: dict, names, where: str):
    if not isinstance(block, dict):
        raise ProblemError(f"{where}: expected an object")
    missing = [n for n in names if n not in block]
    extra = [n for n in block if n not in names]
    if missing:
        raise ProblemError(f"{where}: missing {', '.join(missing)}")
    if extra:
        raise ProblemError(f"{where}: unknown entries {', '.join(extra)}")


def parse_classical(block: dict, grid: Grid) -> ClassicalBoundaryData:
    _require(block, CLASSICAL_NAMES, "classical")
    return ClassicalBoundaryData(**{
        n: _line(block[n], grid, CLASSICAL_AXES[n], f"classical.{n}") for n in CLASSICAL_NAMES
    })


def parse_nonclassical(block: dict, grid: Grid) -> NonClassicalBoundaryData:
    _require(block, SCALAR_NAMES + TRACE_NAMES, "nonclassical")
    return NonClassicalBoundaryData(
        **{n: _scalar(block[n], f"nonclassical.{n}") for n in SCALAR_NAMES},
        **{n: _line(block[n], grid, TRACE_AXES[n], f"nonclassical.{n}") for n in TRACE_NAMES},
    )


def classical_block(c: ClassicalBoundaryData) -> dict:
    return {n: g.values.tolist() for n, g in c.items()}


def nonclassical_block(z: NonClassicalBoundaryData) -> dict:
    out: dict = {n: float(v) for n, v in z.scalars.items()}
    out.update({n: g.values.tolist() for n, g in z.traces.items()})
    return out


def parse_problem(doc: dict, grid_override: tuple[int, int] | None = None, p_override=None) -> ProblemFile:
    if not isinstance(doc, dict):
        raise ProblemError("problem file must hold a JSON object")
    known = {"domain", "grid", "p", "coefficients", "rhs", *DATA_BLOCKS}
    extra = sorted(set(doc) - known)
    if extra:
        raise ProblemError(f"unknown top-level entries: {', '.join(extra)}")
    try:
        dom = doc.get("domain", {})
        rect = Rect(float(dom.get("h1", 1.0)), float(dom.get("h2", 1.0)))
        gb = doc.get("grid", {})
        nx, ny = grid_override or (int(gb.get("nx", 21)), int(gb.get("ny", 21)))
        grid = make_grid(rect, nx, ny)
    except (GridError, TypeError, ValueError, AttributeError) as exc:
        raise ProblemError(f"domain/grid: {exc}") from exc
    try:
        p = parse_exponent(p_override if p_override is not None else doc.get("p", 2))
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"p: {exc}") from exc

    raw = doc.get("coefficients", {})
    if not isinstance(raw, dict):
        raise ProblemError("coefficients: expected an object of 'i,j': expression")
    try:
        coeffs = CoefficientField({k: _expr(v, f"coefficients[{k}]") for k, v in raw.items()})
    except CoefficientError as exc:
        raise ProblemError(f"coefficients: {exc}") from exc

    rhs = _expr(doc["rhs"], "rhs") if "rhs" in doc else None

    present = [b for b in DATA_BLOCKS if b in doc]
    if len(present) != 1:
        raise ProblemError(f"need exactly one of {', '.join(DATA_BLOCKS)}; found {present or 'none'}")
    kind = present[0]
    data = manufactured = None
    if kind == "classical":
        data = parse_classical(doc[kind], grid)
    elif kind == "nonclassical":
        data = parse_nonclassical(doc[kind], grid)
    else:
        _require(doc[kind], ("u_exact",), "manufactured")
        manufactured = ManufacturedCase(_expr(doc[kind]["u_exact"], "manufactured.u_exact"), coeffs, rhs)
    return ProblemFile(doc, grid, p, coeffs, rhs, kind, data, manufactured)


def load_problem(path, grid_override=None, p_override=None) -> ProblemFile:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON ({exc})") from exc
    return parse_problem(doc, grid_override, p_override)
