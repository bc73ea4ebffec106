import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conekit import lift, spherical
from conekit.core import AdmissibilityError
from conekit.reflection import base_metric_G222
from frozen_values import RUGBY_HOLONOMY_HALF, RUGBY_UNIT_LOOP


@given(st.floats(0.1, 1.0))
@settings(max_examples=10)
def test_rugby_unit_loop(beta):
    conn = lift.build_connection(spherical.rugby_ball(beta, 4.0))
    assert conn.loop_integral(0, 1.0) == pytest.approx(RUGBY_UNIT_LOOP, rel=1e-8)


def test_rugby_holonomy_table_against_oracle():
    conn = lift.build_connection(spherical.rugby_ball(0.5, 4.0))
    table = conn.holonomy_table(0)
    for r, v in table:
        assert v == pytest.approx(RUGBY_HOLONOMY_HALF[r], rel=1e-8)
    assert lift.holonomy_decreasing(table)


def test_curvature_density_matches_area_form():
    conn = lift.build_connection(base_metric_G222())
    z = np.array([0.3 + 0.4j, 2 + 1j, -0.5j])
    assert np.allclose(conn.curvature_density(z), conn.expected_density(z), rtol=1e-6)


def test_requires_curvature_four():
    with pytest.raises(ValueError):
        lift.build_connection(spherical.rugby_ball(0.5, 1.0))


def test_total_curvature_two_routes():
    conn = lift.build_connection(base_metric_G222())
    assert conn.total_curvature_quadrature() == pytest.approx(1.0, abs=1e-5)
    assert conn.total_curvature_stokes() == pytest.approx(1.0, abs=1e-5)


def test_link_metric_structure():
    base = spherical.rugby_ball(0.6, 4.0)
    link = lift.hopf_lift(base)
    z = np.array([0.2 + 0.1j, 1.5 - 0.3j])
    assert np.allclose(link.fiber_length(z), 2 * math.pi * 0.6)
    assert link.submersion_defect(z, [[1, 0], [0.3, 1]]).max() < 1e-12
    # det = exp(4 phi) c^2
    expect = np.exp(2 * base.log_factor(z)) * 0.6
    assert np.allclose(link.volume_density(z), expect, rtol=1e-12)


def test_hopf_volume():
    link = lift.hopf_lift(spherical.rugby_ball(0.4, 4.0))
    assert link.volume() == pytest.approx(2 * math.pi ** 2 * 0.16, rel=1e-4)


def test_seifert_volume_and_axes():
    s = lift.seifert_pullback(lift.hopf_lift(spherical.rugby_ball(0.2, 4.0)), 2, 3)
    assert s.axis_angles == pytest.approx((0.6, 0.4))
    assert s.volume() == pytest.approx(6 * 2 * math.pi ** 2 * 0.04, rel=1e-3)
    with pytest.raises(AdmissibilityError):
        lift.seifert_pullback(lift.hopf_lift(spherical.rugby_ball(0.5, 4.0)), 2, 3)
