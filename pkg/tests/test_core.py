from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conekit.core import (INF, AdmissibilityError, ConeConfig, check_spherical_triangle,
                          check_troyanov, collision_angle, cone_number, format_number, parse_number)

angle = st.fractions(min_value=F(1, 50), max_value=F(49, 50))


def test_parse_and_format_round_trip():
    assert parse_number("5/6") == F(5, 6)
    assert parse_number("0.25") == 0.25
    assert format_number(F(5, 6)) == "5/6"
    assert format_number(F(4)) == "4"
    assert format_number(0.1) == 0.1


def test_cone_number_exact():
    assert cone_number([F(1, 2), F(2, 3), F(2, 3)]) == F(5, 12)
    assert cone_number(["1/2", "1/2"]) == F(1, 2)


@given(st.lists(angle, min_size=3, max_size=6), st.randoms())
def test_troyanov_is_permutation_invariant(bs, rnd):
    shuffled = list(bs)
    rnd.shuffle(shuffled)
    assert check_troyanov(bs).passed == check_troyanov(shuffled).passed


@given(st.lists(angle, min_size=3, max_size=6))
def test_troyanov_matches_inequality(bs):
    excess = 2 - len(bs) + sum(bs)
    assert check_troyanov(bs).passed == (0 < excess < 2 * min(bs))


def test_two_points_need_equal_angles():
    assert check_troyanov([F(1, 3), F(1, 3)]).passed
    assert not check_troyanov([F(1, 3), F(1, 2)]).passed


def test_triangle_area():
    rep = check_spherical_triangle(F(1, 2), F(1, 3), F(1, 4))
    assert rep.passed
    assert rep.area == pytest.approx(3.141592653589793 / 12)
    assert not check_spherical_triangle(F(1, 3), F(1, 3), F(1, 3))


@given(st.integers(1, 6), angle)
def test_collision_angle(k, b):
    if k * b + 1 - k <= 0:
        with pytest.raises(AdmissibilityError):
            collision_angle(k, b)
    else:
        assert 1 - collision_angle(k, b) == k * (1 - b)


def test_config_json_and_normalization():
    cfg = ConeConfig((2j, 3, INF), ("1/2", "1/3", "1/3"))
    again = ConeConfig.from_json(cfg.to_json())
    assert again == cfg
    norm = cfg.normalized()
    assert norm.points[0] == 0 and norm.points[1] == 1 and norm.points[2] == INF


def test_config_rejects_repeats():
    with pytest.raises(AdmissibilityError):
        ConeConfig((0, 0, INF), (F(1, 2),) * 3)
