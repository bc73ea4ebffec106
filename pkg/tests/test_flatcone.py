from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conekit import flatcone, spherical
from conekit.core import AdmissibilityError, ConeConfig
from conekit.reflection import base_metric_G222
from frozen_values import (CUSP_SEIFERT_WEIGHT, PRODUCT_DENSITY_04_AT_1_1PI,
                           PRODUCT_DENSITY_07_AT_HALF_2MI)


def test_product_density_oracles():
    fc = flatcone.build_flat_cone(spherical.rugby_ball(0.4, 4.0))
    assert flatcone.volume_density_fd(fc, (1, 1 + 1j)) == pytest.approx(PRODUCT_DENSITY_04_AT_1_1PI, rel=1e-5)
    fc = flatcone.build_flat_cone(spherical.rugby_ball(0.7, 4.0))
    assert flatcone.volume_density_fd(fc, (0.5, 2 - 1j)) == pytest.approx(PRODUCT_DENSITY_07_AT_HALF_2MI, rel=1e-5)


@given(st.floats(0.1, 1.0), st.complex_numbers(max_magnitude=10, allow_nan=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_rugby_base_reproduces_product(beta, z, w):
    fc = flatcone.build_flat_cone(spherical.rugby_ball(beta, 4.0))
    got = fc.potential(z, w)[0]
    want = flatcone.product_potential(beta, z, w)
    assert got == pytest.approx(float(want), rel=1e-12, abs=1e-300)


@given(st.floats(0.1, 1.0), st.floats(0.05, 20))
@settings(max_examples=20)
def test_scaling_closed_form(beta, lam):
    fc = flatcone.build_flat_cone(spherical.rugby_ball(beta, 4.0))
    pts = flatcone.sample_points(fc, 10, np.random.default_rng(0))
    assert flatcone.scaling_check(fc, lam, pts) < 1e-12
    assert flatcone.scaling_check(fc, 1.0, pts) == 0


def test_round_base_is_euclidean():
    fc = flatcone.build_flat_cone(spherical.round_sphere(4.0).__class__(
        ConeConfig((0, "inf"), (1, 1), seifert_axes=True), 4.0, lambda z: spherical.round_log_factor(z, 4.0)))
    assert flatcone.volume_density_fd(fc, (0.3 + 0.2j, -0.7j)) == pytest.approx(1.0, rel=1e-6)
    assert fc.potential(3.0, 4.0)[0] == pytest.approx(25.0)


def test_volume_identity_g222():
    fc = flatcone.build_flat_cone(base_metric_G222())
    assert flatcone.volume_check(fc, n=10).max_relative_error < 1e-3


def test_kahler_closedness_and_line_angle():
    fc = flatcone.build_flat_cone(spherical.rugby_ball(0.4, 4.0))
    assert flatcone.kahler_closedness_fd(fc, (1, 2)) < 1e-4
    assert flatcone.line_cone_angle(fc, 0.3 + 0.2j) == pytest.approx(0.4, rel=1e-5)


def test_near_singular_locus_rejected():
    fc = flatcone.build_flat_cone(spherical.rugby_ball(0.4, 4.0))
    with pytest.raises(AdmissibilityError):
        flatcone.volume_density_fd(fc, (1e-5, 1))


def test_line_mismatch_rejected():
    base = base_metric_G222()
    with pytest.raises(AdmissibilityError):
        flatcone.build_flat_cone(base, [flatcone.Line(0j, 0.5), flatcone.Line(2 + 0j, 0.5),
                                        flatcone.Line("inf", 0.5)])


def test_seifert_weight_and_pullback():
    cfg = ConeConfig((0, "inf", 1), (F(1, 3), F(1, 2), F(1, 2)))
    assert flatcone.seifert_weight(cfg, 2, 3) == CUSP_SEIFERT_WEIGHT
    fc = flatcone.build_flat_cone(spherical.rugby_ball(0.2, 4.0))
    pb = flatcone.seifert_flat_pullback(fc, 2, 3)
    assert pb.seifert_axes() == pytest.approx((0.6, 0.4))
    pts = flatcone.sample_points(pb, 10, np.random.default_rng(3))
    assert flatcone.scaling_check(pb, 1.7, pts) < 1e-12
    assert flatcone.volume_check(pb, n=10).max_relative_error < 1e-3
    with pytest.raises(AdmissibilityError):
        flatcone.seifert_flat_pullback(fc, 2, 4)
