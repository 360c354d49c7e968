"""Boundary-value problems with data on the whole boundary for the sixth-order
pseudoparabolic operator ``sum_{i,j<=3} a_ij D_x^i D_y^j``."""

__version__ = "0.1.0"

from .boundary import (  # noqa: E402
    AgreementReport,
    ClassicalBoundaryData,
    NonClassicalBoundaryData,
    agreement_check,
    classical_to_nonclassical,
    nonclassical_to_classical,
    traces_from_solution,
)
from .expr import Expr, evaluate, parse  # noqa: E402
from .grid import (  # noqa: E402
    Grid,
    GridFunction1D,
    GridFunction2D,
    Rect,
    diff2d,
    fd_weights,
    kernel_integral,
    make_grid,
)
from .norms import lp_norm_2d, mixed_norm, sobolev_norm_1d, sobolev_norm_2d  # noqa: E402
from .operator import CoefficientField, apply_V33, validate_coefficients  # noqa: E402
from .solver import (  # noqa: E402
    ManufacturedCase,
    ProblemSpec,
    SolveResult,
    assemble,
    convergence_study,
    equivalence_check,
    solve,
)
