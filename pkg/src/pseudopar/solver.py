"""Finite-difference collocation for the boundary-value problem on the rectangle.

The discrete system stacks, in this order:

* the PDE at every interior node (both indices in ``1..n-2``);
* ``u = phi1, phi2`` on the lines ``x = 0, h1`` (all ``ny`` nodes each) and
  ``u = psi1, psi2`` on ``y = 0, h2`` without the corners;
* ``D_x u = phi3`` on ``x = 0`` and ``D_y u = psi3`` on ``y = 0`` (one-sided
  stencils, every node of the line).

That is more rows than unknowns; it is solved in the least-squares sense
after scaling every row to unit max-norm. Non-classical data are turned into
classical data first (Taylor formula with integral remainder), so both
problem forms share one discretisation.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .boundary import (
    SCALAR_NAMES as _SCALARS,
    ClassicalBoundaryData,
    NonClassicalBoundaryData,
    max_deviation,
    nonclassical_to_classical,
    traces_from_solution,
)
from .expr import Expr
from .grid import Grid, GridFunction2D, Rect, make_grid, sample
from .operator import CoefficientField, apply_V33

__all__ = [
    "ProblemSpec",
    "LinearSystem",
    "SolveResult",
    "SolverError",
    "IllConditionedWarning",
    "ManufacturedCase",
    "EquivalenceReport",
    "ConvergenceRow",
    "COND_WARN",
    "assemble",
    "solve",
    "equivalence_check",
    "convergence_study",
    "format_table",
]

log = logging.getLogger(__name__)

COND_WARN = 1e10


class SolverError(RuntimeError):
    pass


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: Grid
    coefficients: CoefficientField
    rhs: Expr | GridFunction2D | float
    data: ClassicalBoundaryData | NonClassicalBoundaryData

    def __post_init__(self):
        if self.data.grid != self.grid:
            raise SolverError("boundary data axes do not match the problem grid")
        if isinstance(self.rhs, GridFunction2D) and self.rhs.grid != self.grid:
            raise SolverError("right-hand side is sampled on a different grid")

    @property
    def kind(self) -> str:
        return "nonclassical" if isinstance(self.data, NonClassicalBoundaryData) else "classical"

    def classical_data(self) -> ClassicalBoundaryData:
        if isinstance(self.data, NonClassicalBoundaryData):
            return nonclassical_to_classical(self.data)
        return self.data

    def rhs_samples(self) -> np.ndarray:
        if isinstance(self.rhs, GridFunction2D):
            return self.rhs.values
        if isinstance(self.rhs, Expr):
            return sample(self.rhs, self.grid).values
        return np.full((self.grid.nx, self.grid.ny), float(self.rhs))


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: sp.csr_matrix
    b: np.ndarray
    groups: dict  # name -> slice of rows
    grid: Grid

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def _flat(grid: Grid, i, j):
    return np.asarray(i) * grid.ny + np.asarray(j)


def _selector(grid: Grid, i, j) -> sp.csr_matrix:
    rows = np.arange(np.size(i))
    return sp.csr_matrix((np.ones(rows.size), (rows, _flat(grid, i, j))), shape=(rows.size, grid.nx * grid.ny))


def assemble(spec: ProblemSpec) -> LinearSystem:
    g = spec.grid
    nx, ny = g.nx, g.ny
    st = g.stencils
    c = spec.classical_data()

    ii, jj = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1), indexing="ij")
    ii, jj = ii.reshape(-1), jj.reshape(-1)
    interior = _flat(g, ii, jj)

    coeffs = spec.coefficients
    op = sp.kron(sp.csr_matrix(st.matrix("x", 3)), sp.csr_matrix(st.matrix("y", 3)), format="csr")
    for i, j in coeffs.active():
        a = coeffs.samples(g, (i, j)).reshape(-1)
        term = sp.kron(sp.csr_matrix(st.matrix("x", i)), sp.csr_matrix(st.matrix("y", j)), format="csr")
        op = op + sp.diags(a) @ term
    A_pde = op.tocsr()[interior]
    b_pde = spec.rhs_samples().reshape(-1)[interior]

    all_y = np.arange(ny)
    inner_x = np.arange(1, nx - 1)
    dir_i = np.concatenate([np.zeros(ny, int), np.full(ny, nx - 1), inner_x, inner_x])
    dir_j = np.concatenate([all_y, all_y, np.zeros(nx - 2, int), np.full(nx - 2, ny - 1)])
    A_dir = _selector(g, dir_i, dir_j)
    b_dir = np.concatenate([c.phi1.values, c.phi2.values, c.psi1.values[1:-1], c.psi2.values[1:-1]])

    # D_x at x = 0: row 0 of the x-stencil matrix, tensored with identity in y
    dx_row = sp.csr_matrix(st.matrix("x", 1)[:1])
    A_dx = sp.kron(dx_row, sp.identity(ny), format="csr")
    dy_row = sp.csr_matrix(st.matrix("y", 1)[:1])
    A_dy = sp.kron(sp.identity(nx), dy_row, format="csr")

    blocks = [("pde", A_pde, b_pde), ("dirichlet", A_dir, b_dir),
              ("dx_x0", A_dx, c.phi3.values), ("dy_y0", A_dy, c.psi3.values)]
    groups, start = {}, 0
    for name, A_k, _ in blocks:
        groups[name] = slice(start, start + A_k.shape[0])
        start += A_k.shape[0]
    A = sp.vstack([blk[1] for blk in blocks], format="csr")
    b = np.concatenate([blk[2] for blk in blocks])
    return LinearSystem(A, b, groups, g)


@dataclass(frozen=True, eq=False)
class SolveResult:
    u: GridFunction2D
    residual_norm: float
    condition_estimate: float
    rank: int
    deficiency: int
    diagnostics: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.warnings

    def summary(self) -> str:
        lines = [
            f"unknowns           {self.u.values.size}",
            f"residual_norm      {self.residual_norm:.6e}",
            f"condition_estimate {self.condition_estimate:.6e}",
            f"rank               {self.rank} (deficiency {self.deficiency})",
        ]
        lines += [f"max violation {k:<9} {v:.6e}" for k, v in self.diagnostics.items()]
        lines += [f"WARNING: {w}" for w in self.warnings]
        return "\n".join(lines)


def _lstsq(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Minimum-norm least squares via column-pivoted QR.

    Returns the solution, ``|R_00| / |R_kk|`` over the numerical rank as a
    condition estimate, and the rank.
    """
    m, n = A.shape
    Q, R, perm = sla.qr(A, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0:
        return np.zeros(n), math.inf, 0
    tol = max(m, n) * np.finfo(float).eps * d[0]
    rank = int(np.sum(d > tol))
    cond = float(d[0] / d[rank - 1])
    if rank == n:
        x = np.empty(n)
        x[perm] = sla.solve_triangular(R, Q.T @ b)
        return x, cond, rank
    # rank deficient: complete orthogonal factorisation gives the minimum-norm solution
    x, *_ = sla.lstsq(A, b, cond=tol / d[0], lapack_driver="gelsy")
    return x, math.inf if rank == 0 else cond, rank


def solve(spec: ProblemSpec, system: LinearSystem | None = None, max_deficiency: int | None = None) -> SolveResult:
    """Least-squares collocation solve.

    Warns with :class:`IllConditionedWarning` when the condition estimate
    exceeds ``COND_WARN`` or the system is rank deficient; raises
    :class:`SolverError` on non-finite entries or when the rank deficiency
    exceeds ``max_deficiency``.
    """
    sysm = system if system is not None else assemble(spec)
    A = sysm.A.toarray()
    b = sysm.b
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise SolverError("system has non-finite entries")
    scale = np.abs(A).max(axis=1)
    scale[scale == 0] = 1.0
    As = A / scale[:, None]
    bs = b / scale
    x, cond, rank = _lstsq(As, bs)
    n = A.shape[1]
    deficiency = n - rank
    if max_deficiency is not None and deficiency > max_deficiency:
        raise SolverError(f"rank {rank} of {n}: deficiency {deficiency} exceeds {max_deficiency}")
    r = As @ x - bs
    diagnostics = {name: float(np.abs(r[sl]).max()) if sl.stop > sl.start else 0.0
                   for name, sl in sysm.groups.items()}
    msgs = []
    if cond > COND_WARN:
        msgs.append(f"condition estimate {cond:.3e} exceeds {COND_WARN:.0e}")
    if deficiency:
        msgs.append(f"rank deficient by {deficiency}; minimum-norm solution returned")
    for m in msgs:
        warnings.warn(m, IllConditionedWarning, stacklevel=2)
    return SolveResult(
        u=GridFunction2D(spec.grid, x.reshape(spec.grid.nx, spec.grid.ny)),
        residual_norm=float(np.linalg.norm(r)),
        condition_estimate=cond,
        rank=rank,
        deficiency=deficiency,
        diagnostics=diagnostics,
        warnings=tuple(msgs),
    )


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """An exact solution; the right-hand side and boundary data follow from it.

    Without an explicit ``rhs`` the discrete operator is applied to the exact
    samples, which makes the discrete system consistent with them.
    """

    u_exact: Expr
    coefficients: CoefficientField = field(default_factory=CoefficientField)
    rhs: Expr | None = None

    def spec(self, grid: Grid, nonclassical: bool = False) -> ProblemSpec:
        exact = sample(self.u_exact, grid)
        c, z = traces_from_solution(exact)
        rhs = self.rhs if self.rhs is not None else apply_V33(self.coefficients, exact)
        return ProblemSpec(grid, self.coefficients, rhs, z if nonclassical else c)

    def exact(self, grid: Grid) -> GridFunction2D:
        return sample(self.u_exact, grid)


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    deviations: dict
    result: SolveResult
    recovered: NonClassicalBoundaryData

    @property
    def max_scalar_deviation(self) -> float:
        return max(v for k, v in self.deviations.items() if k in _SCALARS)

    @property
    def max_trace_deviation(self) -> float:
        return max(v for k, v in self.deviations.items() if k not in _SCALARS)

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values())

    def render(self) -> str:
        lines = [f"{'datum':<8} {'deviation':>12}"]
        lines += [f"{k:<8} {v:>12.3e}" for k, v in self.deviations.items()]
        lines.append(f"max scalar deviation {self.max_scalar_deviation:.3e}")
        lines.append(f"max trace deviation  {self.max_trace_deviation:.3e}")
        return "\n".join(lines)


def equivalence_check(spec_nc: ProblemSpec) -> EquivalenceReport:
    """Solve from non-classical data, then read the same data back off ``u``."""
    if not isinstance(spec_nc.data, NonClassicalBoundaryData):
        raise SolverError("equivalence_check needs non-classical data")
    res = solve(spec_nc)
    _, recovered = traces_from_solution(res.u)
    return EquivalenceReport(max_deviation(spec_nc.data, recovered), res, recovered)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    max_error: float
    order: float | str  # observed order, "exact", or "—" when undefined

    def order_text(self) -> str:
        return self.order if isinstance(self.order, str) else f"{self.order:.4f}"


def convergence_study(case: ManufacturedCase, sizes, rect: Rect | None = None,
                      nonclassical: bool = False, exact_tol: float = 1e-9) -> list[ConvergenceRow]:
    """Max nodal error on a sequence of ``n x n`` grids.

    The order column compares each row with the previous one:
    ``log(e_prev / e) / log(h_prev / h)``. When both errors are at most
    ``exact_tol`` the scheme is exact on the case and the entry is
    ``"exact"``; when both are zero it is ``"—"``. The first row always has
    ``"—"``.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise SolverError("a convergence study needs at least three grid sizes")
    rect = rect or Rect()
    rows: list[ConvergenceRow] = []
    for n in sizes:
        grid = make_grid(rect, n, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllConditionedWarning)
            res = solve(case.spec(grid, nonclassical))
        err = float(np.abs(res.u.values - case.exact(grid).values).max())
        if not rows:
            order: float | str = "—"
        else:
            prev = rows[-1]
            if err == 0 and prev.max_error == 0:
                order = "—"
            elif err <= exact_tol and prev.max_error <= exact_tol:
                order = "exact"
            elif err == 0 or prev.max_error == 0:
                order = "—"
            else:
                order = math.log(prev.max_error / err) / math.log(prev.h / grid.dx)
        rows.append(ConvergenceRow(n, grid.dx, err, order))
        log.info("n=%d h=%.4g max_error=%.3e", n, grid.dx, err)
    return rows


def format_table(rows: list[ConvergenceRow]) -> str:
    """CSV ``h,max_error,order``."""
    out = ["h,max_error,order"]
    out += [f"{r.h:.17g},{r.max_error:.17g},{r.order_text()}" for r in rows]
    return "\n".join(out) + "\n"
