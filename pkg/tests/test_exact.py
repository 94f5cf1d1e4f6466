import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from isingcircle.errors import PreconditionViolated
from isingcircle.exact import (
    Angle,
    CircularArc,
    GaussianRational,
    I_UNIT,
    ONE,
    UnitPoint,
    arc_contains,
    arc_length,
    continued_fraction_round,
    format_gaussian,
    parse_angle,
    parse_gaussian,
    point_angle,
    rational_circle_point,
)

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=50)
gaussians = st.builds(GaussianRational, rationals, rationals)


def test_rational_circle_point_at_zero():
    assert rational_circle_point(Angle.pi_multiple(0), Fraction(1, 10)) == ONE


@pytest.mark.parametrize("theta", ["pi/3", "2pi/3", "-pi/7", "5/2", "pi"])
@pytest.mark.parametrize("eps", [Fraction(1, 10), Fraction(1, 10 ** 12)])
def test_rational_circle_point_accuracy(theta, eps):
    ang = parse_angle(theta)
    z = rational_circle_point(ang, eps)
    assert z.norm2() == 1
    target = mpmath.expj(ang.mp_value(200))
    with mpmath.workprec(200):
        assert abs(z.to_mpc() - target) <= mpmath.mpf(eps.numerator) / eps.denominator


@pytest.mark.parametrize(
    "alpha,K,expected",
    [(Fraction(1, 3), 10, Fraction(1, 3)), (Fraction(333, 1000), 10, Fraction(1, 3)), (Fraction(2, 5), 2, Fraction(1, 2))],
)
def test_continued_fraction_round_examples(alpha, K, expected):
    assert continued_fraction_round(alpha, K) == expected


@given(st.fractions(min_value=-5, max_value=5, max_denominator=10 ** 6), st.integers(1, 60))
def test_continued_fraction_round_matches_exhaustive_search(alpha, K):
    found = [Fraction(round(alpha * q), q) for q in range(1, K + 1)]
    valid = {f for f in found if abs(alpha - f) < Fraction(1, 2 * K * K)}
    got = continued_fraction_round(alpha, K)
    assert (got is None) == (not valid)
    if got is not None:
        assert valid == {got}


def test_arc_examples():
    full = CircularArc.full_circle()
    assert arc_contains(full, I_UNIT)
    assert abs(arc_length(full).value - 2 * mpmath.pi) < 1e-30
    quarter = CircularArc.closed(ONE, I_UNIT)
    assert arc_contains(quarter, ONE)
    assert not arc_contains(quarter, UnitPoint(0, -1))
    wrap = CircularArc.closed(I_UNIT, ONE)
    assert abs(arc_length(wrap).value - 3 * mpmath.pi / 2) < 1e-30


@given(gaussians, gaussians)
def test_field_axioms(a, b):
    assert a * b == b * a
    assert (a + b) - b == a
    if not b.is_zero():
        assert (a / b) * b == a
    assert (a * b).conj() == a.conj() * b.conj()
    assert (a * b).norm2() == a.norm2() * b.norm2()


@given(gaussians)
def test_gaussian_literal_round_trip(z):
    assert parse_gaussian(format_gaussian(z)) == z


@pytest.mark.parametrize(
    "text,value",
    [("i", (0, 1)), ("-i", (0, -1)), ("3/5+4/5 i", (Fraction(3, 5), Fraction(4, 5))), ("0.6-0.8i", (Fraction(3, 5), Fraction(-4, 5))), ("-1", (-1, 0))],
)
def test_parse_gaussian(text, value):
    assert parse_gaussian(text) == GaussianRational(*value)


def test_unit_point_rejects_off_circle():
    with pytest.raises(PreconditionViolated):
        UnitPoint(Fraction(1, 2), Fraction(1, 2))


@given(st.integers(2, 40), st.integers(1, 39), st.booleans(), st.booleans())
def test_point_angle_matches_atan2(m, k, sx, sy):
    if k >= m:
        return
    r = m * m + k * k
    z = UnitPoint(Fraction((m * m - k * k) * (-1 if sx else 1), r), Fraction(2 * m * k * (-1 if sy else 1), r))
    a = point_angle(z)
    expected = math.atan2(float(z.im), float(z.re)) % (2 * math.pi)
    assert abs(float(a.value) - expected) < 1e-12
