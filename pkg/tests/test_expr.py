import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudopar.expr import ExprDomainError, ExprSyntaxError, evaluate, parse


def test_zero_literal():
    e = parse("0")
    assert e(0.3, -7.0) == 0


def test_monomial_value():
    assert evaluate("x^3*y^3", 1, 2) == 8


def test_trailing_operator_reports_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x +")
    assert info.value.offset == 3


@pytest.mark.parametrize("text, offset", [("(x", 2), ("x y", 2), ("2 * $", 4), ("sin x", 4)])
def test_syntax_errors_carry_position(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(ExprSyntaxError, match="unknown identifier 'z'"):
        parse("x + z")


def test_empty_text_rejected():
    with pytest.raises(ExprSyntaxError):
        parse("   ")


def test_step_convention():
    e = parse("step(x−0.5)")  # unicode minus
    assert e(0.25, 0) == 0
    assert e(0.75, 0) == 1
    assert e(0.5, 0) == 1


def test_trig_and_constant():
    assert evaluate("sin(x)*cos(y)", 0, 0) == 0
    assert evaluate("36", 0.1, 0.9) == 36


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2^3^2", 512.0),
        ("-2^2", -4.0),
        ("2*3+4", 10.0),
        ("2+3*4", 14.0),
        ("8/4/2", 1.0),
        ("7-4-2", 1.0),
        ("2^-1", 0.5),
        ("abs(-3)+sqrt(16)", 7.0),
        ("exp(0)", 1.0),
        ("1e-3*1000", 1.0),
    ],
)
def test_precedence_and_associativity(text, expected):
    assert evaluate(text) == pytest.approx(expected, rel=1e-15)


def test_division_by_zero_names_subexpression():
    with pytest.raises(ExprDomainError) as info:
        evaluate("1 + 1/x", 0.0, 1.0)
    assert str(info.value.subexpr) == "(1.0 / x)"


def test_sqrt_of_negative():
    with pytest.raises(ExprDomainError, match="sqrt"):
        evaluate("sqrt(x - 1)", 0.0, 0.0)


def test_vectorised_evaluation_matches_scalar():
    e = parse("sin(x)*y^2 + step(y-0.5)")
    X, Y = np.meshgrid(np.linspace(0, 1, 5), np.linspace(0, 1, 7), indexing="ij")
    V = e(X, Y)
    for i in range(5):
        for j in range(7):
            assert V[i, j] == e(float(X[i, j]), float(Y[i, j]))


def test_vectorised_domain_error():
    with pytest.raises(ExprDomainError):
        parse("1/x")(np.linspace(0, 1, 4), np.zeros(4))


def test_constant_broadcasts_over_arrays():
    assert parse("36")(np.zeros((3, 2)), np.zeros((3, 2))).shape == (3, 2)


def _horner(coef, x, y):
    # coef[a][b] multiplies x^a y^b; nested Horner in x then y
    acc_x = 0.0
    for a in reversed(range(len(coef))):
        acc_y = 0.0
        for b in reversed(range(len(coef[a]))):
            acc_y = acc_y * y + coef[a][b]
        acc_x = acc_x * x + acc_y
    return acc_x


def test_random_polynomials_agree_with_horner():
    rng = np.random.default_rng(12)
    for _ in range(200):
        deg = int(rng.integers(0, 5))
        coef = [[0.0] * 5 for _ in range(5)]
        terms = []
        for a in range(deg + 1):
            for b in range(deg + 1 - a):
                c = round(float(rng.uniform(-5, 5)), 6)
                coef[a][b] = c
                terms.append(f"({c!r})*x^{a}*y^{b}")
        e = parse(" + ".join(terms))
        x, y = rng.uniform(-2, 2, 2)
        ref = _horner(coef, x, y)
        scale = max(1.0, abs(ref), sum(abs(c) for row in coef for c in row) * 16)
        assert abs(e(x, y) - ref) <= 1e-12 * scale


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@given(a=finite, b=finite, c=finite)
def test_product_binds_tighter_than_sum(a, b, c):
    lhs = evaluate(f"{a!r}+{b!r}*{c!r}")
    rhs = evaluate(f"{a!r}+({b!r}*{c!r})")
    assert lhs == rhs


@settings(max_examples=60)
@given(x=st.floats(-3, 3), y=st.floats(-3, 3))
def test_print_reparse_roundtrip(x, y):
    for text in ("-x^2 + 3*y - 2/(1+x^2)", "step(x-0.5)*cos(y)^3", "2^-y - -x", "abs(x*y) - exp(-y)"):
        e = parse(text)
        again = parse(str(e))
        v1, v2 = e(x, y), again(x, y)
        assert v1 == v2 or math.isclose(v1, v2, rel_tol=1e-15, abs_tol=1e-300)
