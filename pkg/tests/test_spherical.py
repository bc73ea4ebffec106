import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conekit import spherical
from conekit.core import AdmissibilityError, ConeConfig
from frozen_values import RUGBY_AREA_03_K4, RUGBY_AREA_HALF_K1


@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_chart_round_trip(z):
    P = spherical.chart_to_sphere(np.array([z]), "xi")
    assert abs(spherical.sphere_to_chart(P, "xi")[0] - z) <= 1e-9 * max(1, abs(z))
    assert np.allclose(np.linalg.norm(P, axis=-1), 1)


def test_rugby_area_oracles():
    assert spherical.total_area(spherical.rugby_ball(0.5, 1.0)).area == pytest.approx(RUGBY_AREA_HALF_K1, rel=1e-7)
    assert spherical.total_area(spherical.rugby_ball(0.3, 4.0)).area == pytest.approx(RUGBY_AREA_03_K4, rel=1e-7)


@given(st.floats(0.05, 1.0))
@settings(max_examples=15)
def test_rugby_curvature(beta):
    K = spherical.curvature_check(spherical.rugby_ball(beta, 1.0), n=10, step=1e-3)
    assert np.max(np.abs(K - 1)) < 1e-4


def test_round_sphere_curvature_and_area():
    g = spherical.round_sphere(4.0)
    assert spherical.total_area(g).area == pytest.approx(math.pi, rel=1e-7)
    K = spherical.curvature_check(g, n=10)
    assert np.max(np.abs(K - 4)) < 1e-4


def test_solver_rejects_inadmissible():
    with pytest.raises(AdmissibilityError):
        spherical.solve_liouville(ConeConfig((0, 1, "inf"), (F(1, 3),) * 3))


def test_solver_rugby_and_json_round_trip(tmp_path):
    cfg = ConeConfig((0, "inf"), (F(2, 5), F(2, 5)))
    sol = spherical.solve_liouville(cfg, kappa=1.0, n_radial=24, n_angular=16)
    z = np.array([0.1, 0.5 + 0.5j, -0.9j])
    err = np.abs(sol.regular_part(z) - spherical.rugby_regular_part(0.4, 1.0, z))
    assert err.max() < 1e-5
    again = spherical.CapSolution.from_json(sol.to_json())
    assert np.allclose(again.log_factor(z), sol.log_factor(z), rtol=0, atol=1e-14)


def test_solver_curvature_three_points():
    cfg = ConeConfig((0, 1, "inf"), (F(1, 2), F(1, 2), F(1, 2)))
    sol = spherical.solve_liouville(cfg, kappa=4.0, n_radial=24, n_angular=24)
    assert sol.report.residual < 1e-8
    K = spherical.curvature_check(sol, n=10)
    assert np.max(np.abs(K - 4)) < 1e-3
    assert spherical.gauss_bonnet(sol) == pytest.approx(2 * 0.25, rel=1e-4)
