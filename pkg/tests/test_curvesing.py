import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conekit.curvesing import (PolynomialSyntaxError, UnsupportedGerm, analyze_germ, brieskorn,
                               flat_cone_angle_window, format_polynomial, ordinary_point,
                               parse_polynomial, product_threshold, rescaling_exponent)


def test_cusp():
    g = analyze_germ("w^2 - z^3")
    assert g.c0 == F(5, 6)
    assert g.admissible_range() == (F(1, 6), F(1))


@given(st.integers(2, 6), st.integers(3, 13))
def test_brieskorn_exponent(m, n):
    if n <= m or math.gcd(m, n) != 1:
        return
    assert analyze_germ(brieskorn(m, n)).c0 == F(1, m) + F(1, n)


@given(st.integers(2, 8))
def test_ordinary_points(d):
    assert analyze_germ(ordinary_point(d)).c0 == F(2, d)


def test_tangent_normalization():
    # cusp with tangent along z = w
    assert analyze_germ("(z - w)^2 - z^3").c0 == F(5, 6)
    assert analyze_germ("z^2 - w^3").c0 == F(5, 6)


def test_smooth_and_rejections():
    assert analyze_germ("z + w^2").c0 == 1
    with pytest.raises(UnsupportedGerm):
        analyze_germ("(w - z^2)^2 - z^5")
    with pytest.raises(UnsupportedGerm):
        analyze_germ("1 + z")
    with pytest.raises(PolynomialSyntaxError):
        parse_polynomial("2z")


@given(st.dictionaries(st.tuples(st.integers(0, 5), st.integers(0, 5)),
                       st.fractions(min_value=-5, max_value=5, max_denominator=7), max_size=6))
def test_parse_format_round_trip(poly):
    poly = {k: v for k, v in poly.items() if v != 0}
    assert parse_polynomial(format_polynomial(poly)) == poly


@given(st.integers(2, 5), st.integers(3, 9), st.fractions(min_value=F(1, 100), max_value=F(99, 100)))
def test_rescaling_sign_matches_threshold(m, n, beta):
    if n <= m or m * beta + 1 - m <= 0:
        return
    v = rescaling_exponent(m, n, beta)
    thr = product_threshold(m, n)
    assert (v.exponent > 0) == (beta > thr)
    assert (v.exponent == 0) == (beta == thr)


def test_flat_cone_window():
    assert flat_cone_angle_window(2, 3) == (F(1, 6), F(5, 6))
