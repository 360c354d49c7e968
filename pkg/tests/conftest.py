import numpy as np
import pytest

from pseudopar.boundary import SCALAR_NAMES, TRACE_AXES, TRACE_NAMES, NonClassicalBoundaryData
from pseudopar.grid import GridFunction1D, Rect, make_grid

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def unit21():
    return make_grid(Rect(1.0, 1.0), 21, 21)


@pytest.fixture
def unit33():
    return make_grid(Rect(1.0, 1.0), 33, 33)


def random_nonclassical(grid, rng, traces="pl"):
    """Scalars uniform in [-1, 1]; traces piecewise-linear through random node
    values (``"pl"``) or random affine functions (``"affine"``)."""
    scalars = {n: rng.uniform(-1, 1) for n in SCALAR_NAMES}
    lines = {}
    for n in TRACE_NAMES:
        t = grid.nodes(TRACE_AXES[n])
        if traces == "pl":
            vals = rng.uniform(-1, 1, t.size)
        else:
            vals = rng.uniform(-1, 1) + rng.uniform(-1, 1) * t
        lines[n] = GridFunction1D(grid, TRACE_AXES[n], vals)
    return NonClassicalBoundaryData(**scalars, **lines)
