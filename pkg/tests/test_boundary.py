import numpy as np
import pytest
from scipy.integrate import quad

from conftest import random_nonclassical
from pseudopar.boundary import (
    AGREEMENT_CONDITIONS,
    SCALAR_NAMES,
    TRACE_NAMES,
    ClassicalBoundaryData,
    NonClassicalBoundaryData,
    agreement_check,
    classical_to_nonclassical,
    max_deviation,
    nonclassical_to_classical,
    traces_from_solution,
)
from pseudopar.expr import parse
from pseudopar.grid import GridFunction1D, GridFunction2D, Rect, make_grid, sample, sample_line

PRODUCT = "(1+x)^3*(1+y)^3"


def classical_from(text, grid):
    c, _ = traces_from_solution(sample(parse(text), grid))
    return c


def shifted(c, name, amount):
    g = getattr(c, name)
    parts = dict(c.items())
    parts[name] = GridFunction1D(g.grid, g.axis, g.values + amount)
    return ClassicalBoundaryData(**parts)


# agreement_check


def test_zero_data_agrees(unit33):
    report = agreement_check(ClassicalBoundaryData.zeros(unit33))
    assert report.passed
    assert report.max_difference == 0
    assert [r.name for r in report.residuals] == list(AGREEMENT_CONDITIONS)


def test_product_traces_agree(unit33):
    report = agreement_check(classical_from(PRODUCT, unit33), tol=1e-6)
    assert report.passed, report.render()


def test_product_traces_from_expressions_agree(unit33):
    # the classical data written out symbolically, not read off a 2-D sample
    x = lambda t: sample_line(parse(t), unit33, "x")  # noqa: E731
    y = lambda t: sample_line(parse(t), unit33, "y")  # noqa: E731
    c = ClassicalBoundaryData(phi1=y("(1+y)^3"), phi2=y("8*(1+y)^3"), phi3=y("3*(1+y)^3"),
                              psi1=x("(1+x)^3"), psi2=x("8*(1+x)^3"), psi3=x("3*(1+x)^3"))
    assert agreement_check(c, tol=1e-6).passed


def test_phi1_shift_breaks_two_value_conditions(unit33):
    c = shifted(classical_from(PRODUCT, unit33), "phi1", 1.0)
    report = agreement_check(c, tol=1e-6)
    assert sorted(report.failed) == sorted(["phi1(h2)=psi2(0)", "phi1(0)=psi1(0)"])
    assert report["phi1(h2)=psi2(0)"].difference == pytest.approx(1.0, abs=1e-9)
    assert report["phi1(0)=psi1(0)"].difference == pytest.approx(1.0, abs=1e-9)
    # a constant shift has no derivative
    assert report["psi3(0)=phi1'(0)"].difference < 1e-6


@pytest.mark.parametrize("shift", [0.5, -3.0])
def test_constant_shift_pattern(unit33, shift):
    base = agreement_check(classical_from(PRODUCT, unit33))
    c = classical_from(PRODUCT, unit33).map(lambda v: v + shift)
    moved = agreement_check(c)
    shifted_by_c = {"phi3(0)=psi1'(0)", "phi3(h2)=psi2'(0)", "psi3(0)=phi1'(0)", "psi3(h1)=phi2'(0)"}
    for name in AGREEMENT_CONDITIONS:
        if name in shifted_by_c:
            assert moved[name].difference == pytest.approx(abs(shift), abs=1e-6), name
        else:
            assert moved[name].difference == pytest.approx(base[name].difference, abs=1e-9), name


def test_tol_must_be_positive(unit33):
    with pytest.raises(ValueError):
        agreement_check(ClassicalBoundaryData.zeros(unit33), tol=0)


def test_render_lists_every_condition(unit33):
    text = agreement_check(ClassicalBoundaryData.zeros(unit33)).render()
    for name in AGREEMENT_CONDITIONS:
        assert name in text
    assert text.endswith("PASS")


# classical_to_nonclassical


def test_extract_product(unit33):
    z = classical_to_nonclassical(classical_from(PRODUCT, unit33))
    assert z.z00 == pytest.approx(1, abs=1e-9)
    assert z.z01 == pytest.approx(3, abs=1e-9)
    assert z.z02 == pytest.approx(6, abs=1e-9)
    np.testing.assert_allclose(z.z03.values, 6.0, atol=1e-6)
    assert max(z.discrepancies.values()) < 1e-6


def test_extract_zero(unit33):
    z = classical_to_nonclassical(ClassicalBoundaryData.zeros(unit33))
    assert z.magnitude() == 0


def test_extract_cubic_product(unit33):
    z = classical_to_nonclassical(classical_from("x^3*y^3", unit33))
    np.testing.assert_allclose(z.z30.values, 0.0, atol=1e-9)
    np.testing.assert_allclose(z.zh2_30.values, 6.0, atol=1e-6)


def test_dual_source_discrepancy_reported(unit33):
    c = shifted(classical_from(PRODUCT, unit33), "psi1", 0.25)
    z = classical_to_nonclassical(c)
    # z00 is taken from phi1(0); psi1(0) disagrees by the shift
    assert z.z00 == pytest.approx(1.0, abs=1e-9)
    assert z.discrepancies["z00"] == pytest.approx(0.25, abs=1e-9)
    assert z.discrepancies["zh1_00"] == pytest.approx(0.25, abs=1e-9)


# nonclassical_to_classical


def _with(z, **changes):
    parts = {**z.scalars, **z.traces, **changes}
    return NonClassicalBoundaryData(**parts)


def test_reconstruct_phi1_closed_form(unit33):
    g = unit33
    z = _with(NonClassicalBoundaryData.zeros(g), z00=1.0, z01=2.0, z02=4.0,
              z03=GridFunction1D(g, "y", np.full(g.ny, 6.0)))
    c = nonclassical_to_classical(z)
    y = g.y
    np.testing.assert_allclose(c.phi1.values, 1 + 2 * y + 2 * y**2 + y**3, atol=1e-12)
    # trapezoid quadrature gets there only to O(h^2)
    rough = nonclassical_to_classical(z, method="trapezoid")
    err = np.abs(rough.phi1.values - (1 + 2 * y + 2 * y**2 + y**3)).max()
    assert 1e-6 < err < g.dy**2


def test_reconstruct_zero(unit33):
    c = nonclassical_to_classical(NonClassicalBoundaryData.zeros(unit33))
    assert all(np.all(g.values == 0) for _, g in c.items())


def test_reconstruct_product(unit33):
    _, z = traces_from_solution(sample(parse(PRODUCT), unit33))
    c = nonclassical_to_classical(z)
    y, x = unit33.y, unit33.x
    np.testing.assert_allclose(c.phi1.values, (1 + y) ** 3, atol=1e-6)
    np.testing.assert_allclose(c.psi2.values, 8 * (1 + x) ** 3, atol=1e-6)


# round trips


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("rect", [Rect(1, 1), Rect(2.0, 0.5)])
def test_round_trip_A(seed, rect):
    g = make_grid(rect, 33, 25)
    z = random_nonclassical(g, np.random.default_rng(seed), traces="affine")
    back = classical_to_nonclassical(nonclassical_to_classical(z))
    dev = max_deviation(z, back)
    assert max(dev[n] for n in SCALAR_NAMES) <= 1e-9, dev
    assert max(dev[n] for n in TRACE_NAMES) <= 1e-9, dev


def _random_bicubic(rng):
    terms = [f"({rng.uniform(-1, 1)!r})*x^{a}*y^{b}" for a in range(4) for b in range(4)]
    return " + ".join(terms)


@pytest.mark.parametrize("seed", range(5))
def test_round_trip_B(unit33, seed):
    c = classical_from(_random_bicubic(np.random.default_rng(seed)), unit33)
    back = nonclassical_to_classical(classical_to_nonclassical(c))
    for name, g in c.items():
        np.testing.assert_allclose(getattr(back, name).values, g.values, atol=1e-9, err_msg=name)


# agreement after reconstruction

SAME_DATUM = ("phi3(0)=psi1'(0)", "phi1(0)=psi1(0)", "phi3'(0)=psi3'(0)", "psi3(0)=phi1'(0)")
CROSS = ("phi1(h2)=psi2(0)", "phi3(h2)=psi2'(0)", "psi1(h1)=phi2(0)", "phi2(h2)=psi2(h1)", "psi3(h1)=phi2'(0)")


def test_condition_partition():
    assert set(SAME_DATUM) | set(CROSS) == set(AGREEMENT_CONDITIONS)
    assert not set(SAME_DATUM) & set(CROSS)


@pytest.mark.parametrize("seed", range(10))
def test_same_datum_conditions_hold_for_random_data(unit33, seed):
    z = random_nonclassical(unit33, np.random.default_rng(seed))
    report = agreement_check(nonclassical_to_classical(z))
    tol = 50 * unit33.dx**2 * z.magnitude()
    for name in SAME_DATUM:
        assert report[name].difference <= tol, (name, report[name])


def _remainder(g: GridFunction1D, t: float) -> float:
    nodes, vals = g.nodes, g.values
    f = lambda s: 0.5 * (t - s) ** 2 * np.interp(s, nodes, vals)  # noqa: E731
    return quad(f, 0.0, t, points=nodes[(nodes > 0) & (nodes < t)], limit=200, epsabs=1e-14)[0]


@pytest.mark.parametrize("seed", range(3))
def test_cross_conditions_compare_independent_data(seed):
    """The value conditions linking different corners reduce to identities
    between independent inputs; their residuals equal those defects."""
    g = make_grid(Rect(1.0, 1.0), 17, 17)
    z = random_nonclassical(g, np.random.default_rng(100 + seed))
    report = agreement_check(nonclassical_to_classical(z))
    h1, h2 = g.rect.h1, g.rect.h2
    phi1_h2 = z.z00 + h2 * z.z01 + h2**2 / 2 * z.z02 + _remainder(z.z03, h2)
    psi1_h1 = z.z00 + h1 * z.z10 + h1**2 / 2 * z.z20 + _remainder(z.z30, h1)
    phi2_h2 = z.zh1_00 + h2 * z.zh1_01 + h2**2 / 2 * z.zh1_02 + _remainder(z.zh1_03, h2)
    psi2_h1 = z.zh2_00 + h1 * z.zh2_10 + h1**2 / 2 * z.zh2_20 + _remainder(z.zh2_30, h1)
    assert report["phi1(h2)=psi2(0)"].difference == pytest.approx(abs(phi1_h2 - z.zh2_00), abs=1e-12)
    assert report["psi1(h1)=phi2(0)"].difference == pytest.approx(abs(psi1_h1 - z.zh1_00), abs=1e-12)
    assert report["phi2(h2)=psi2(h1)"].difference == pytest.approx(abs(phi2_h2 - psi2_h1), abs=1e-12)


def consistent_nonclassical(grid, rng):
    """Random affine traces and free scalars; the five corner-linking
    scalars are then solved for so that every condition holds."""
    z = random_nonclassical(grid, rng, traces="affine")
    c = nonclassical_to_classical(z)
    z = _with(z, zh1_00=c.psi1.values[-1], zh1_01=c.psi3.values[-1],
              zh2_00=c.phi1.values[-1], zh2_10=c.phi3.values[-1])
    c = nonclassical_to_classical(z)
    # psi2(h1) = phi2(h2) fixes zh2_20
    gap = c.phi2.values[-1] - c.psi2.values[-1]
    return _with(z, zh2_20=z.zh2_20 + 2 * gap / grid.rect.h1**2)


@pytest.mark.parametrize("seed", range(5))
def test_consistent_data_passes_all_nine(unit33, seed):
    z = consistent_nonclassical(unit33, np.random.default_rng(seed))
    report = agreement_check(nonclassical_to_classical(z), tol=1e-9)
    assert report.passed, report.render()


# traces_from_solution


def test_traces_of_zero(unit21):
    c, z = traces_from_solution(GridFunction2D(unit21, np.zeros((21, 21))))
    assert all(np.all(g.values == 0) for _, g in c.items())
    assert z.magnitude() == 0


def test_traces_of_cubic_product(unit21):
    c, z = traces_from_solution(sample(parse("x^3*y^3"), unit21))
    np.testing.assert_allclose(c.phi2.values, unit21.y**3, atol=1e-12)
    np.testing.assert_allclose(c.psi2.values, unit21.x**3, atol=1e-12)
    for name in ("phi1", "phi3", "psi1", "psi3"):
        np.testing.assert_allclose(getattr(c, name).values, 0.0, atol=1e-9)
    np.testing.assert_allclose(z.z13.values, 0.0, atol=1e-8)
    np.testing.assert_allclose(z.zh1_03.values, 6.0, atol=1e-7)


def test_classical_data_axes_checked(unit21):
    zeros = ClassicalBoundaryData.zeros(unit21)
    parts = dict(zeros.items())
    parts["phi1"] = GridFunction1D(unit21, "x", np.zeros(21))
    with pytest.raises(ValueError):
        ClassicalBoundaryData(**parts)


def test_nonclassical_scalars_must_be_finite(unit21):
    with pytest.raises(ValueError):
        _with(NonClassicalBoundaryData.zeros(unit21), z11=float("nan"))
