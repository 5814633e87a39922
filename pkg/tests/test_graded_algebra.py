"""The exact supercommutative polynomial kernel."""

from fractions import Fraction

import pytest

from gq import (
    Chart, ChartMismatchError, GPoly, GradingError, GVar, left_derivative,
    multiply, rescale, scaling_check, substitute, weight_of,
)
from conftest import homogeneous_pieces, random_poly


@pytest.fixture
def chart():
    return Chart.build(("x", 0), ("y", 0), ("xi1", 1), ("xi2", 1), ("xi3", 1))


def test_odd_anticommutation(chart):
    xi1, xi2 = chart.var("xi1"), chart.var("xi2")
    assert str(xi1 * xi2) == "xi1*xi2"
    assert xi2 * xi1 == -(xi1 * xi2)


def test_odd_square_vanishes(chart):
    xi1 = chart.var("xi1")
    assert (xi1 * xi1).is_zero()


def test_mixed_product_cancels_repeated_odd(chart):
    x, xi1, xi2 = chart.var("x"), chart.var("xi1"), chart.var("xi2")
    # (x + xi1 xi2) xi1 = x xi1 since xi1 xi2 xi1 = 0
    assert (x + xi1 * xi2) * xi1 == x * xi1


def test_even_derivative(chart):
    x = chart.var("x")
    assert left_derivative(x * x, "x") == 2 * x
    assert left_derivative(chart.one(), "x").is_zero()


def test_odd_derivative_signs(chart):
    xi1, xi2 = chart.var("xi1"), chart.var("xi2")
    assert left_derivative(xi1 * xi2, "xi1") == xi2
    assert left_derivative(xi1 * xi2, "xi2") == -xi1


def test_weight_of(chart):
    x, xi1, xi2 = chart.var("x"), chart.var("xi1"), chart.var("xi2")
    assert weight_of(xi1 * xi2) == 2
    assert weight_of(x) == 0
    assert weight_of(x + xi1 * xi2) is None
    assert weight_of(chart.zero()) == 0


def test_scaling_check(chart):
    x, xi1, xi2 = chart.var("x"), chart.var("xi1"), chart.var("xi2")
    assert scaling_check(xi1 * xi2, 3)
    assert scaling_check(chart.const(7), Fraction(5, 2))
    assert scaling_check(x * xi1, 2)
    with pytest.raises(GradingError):
        scaling_check(x + xi1 * xi2, 2)
    assert rescale(xi1 * xi2, 3) == 9 * (xi1 * xi2)


def test_chart_mismatch(chart):
    other = Chart.build(("x", 0))
    with pytest.raises(ChartMismatchError):
        chart.var("x") * other.var("x")


def test_negative_weight_rejected():
    with pytest.raises(GradingError):
        GVar("bad", -1)


def test_canonical_form_idempotent(chart, rng):
    for _ in range(50):
        p = random_poly(chart, rng)
        again = GPoly(chart, dict(p.terms))
        assert again == p and str(again) == str(p)


def test_supercommutativity(chart, rng):
    for _ in range(200):
        p0, q0 = random_poly(chart, rng), random_poly(chart, rng)
        for p in homogeneous_pieces(p0):
            for q in homogeneous_pieces(q0):
                sign = -1 if (p.weight() % 2) * (q.weight() % 2) else 1
                assert multiply(p, q) == sign * multiply(q, p)


def test_associativity(chart, rng):
    for _ in range(200):
        p, q, r = (random_poly(chart, rng) for _ in range(3))
        assert (p * q) * r == p * (q * r)


def test_left_leibniz_rule(chart, rng):
    for _ in range(200):
        p0, q0 = random_poly(chart, rng), random_poly(chart, rng)
        for v in chart.gvars:
            for p in homogeneous_pieces(p0):
                sign = -1 if v.parity * (p.weight() % 2) else 1
                lhs = left_derivative(p * q0, v.name)
                rhs = left_derivative(p, v.name) * q0 + sign * p * left_derivative(q0, v.name)
                assert lhs == rhs


def test_derivatives_graded_commute(chart, rng):
    for _ in range(100):
        p = random_poly(chart, rng)
        for u in chart.gvars:
            for v in chart.gvars:
                sign = -1 if u.parity * v.parity else 1
                lhs = left_derivative(left_derivative(p, v.name), u.name)
                rhs = left_derivative(left_derivative(p, u.name), v.name)
                assert lhs == sign * rhs


def test_derivative_drops_weight(chart, rng):
    for _ in range(50):
        p0 = random_poly(chart, rng)
        for p in homogeneous_pieces(p0):
            for v in chart.gvars:
                d = left_derivative(p, v.name)
                if not d.is_zero():
                    assert d.weight() == p.weight() - v.weight


def test_substitute_same_weight(chart):
    x, y, xi1, xi2, xi3 = (chart.var(n) for n in ("x", "y", "xi1", "xi2", "xi3"))
    # even substitution
    p = x * x * xi1
    assert substitute(p, "x", x + y) == (x + y) * (x + y) * xi1
    # odd substitution keeps the Koszul bookkeeping: xi2 -> xi2 + x*xi3
    q = xi1 * xi2 * xi3
    got = substitute(q, "xi2", xi2 + x * xi3)
    assert got == xi1 * (xi2 + x * xi3) * xi3
    with pytest.raises(GradingError):
        substitute(p, "x", xi1)  # weight mismatch
