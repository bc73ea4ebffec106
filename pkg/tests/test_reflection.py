import math
from fractions import Fraction as F

import numpy as np
import pytest

from conekit import reflection


@pytest.mark.parametrize("family,m,order,deg", [("g2m22", 3, 36, 6), ("tetrahedral", None, 144, 12),
                                                ("octahedral", None, 576, 24),
                                                ("icosahedral", None, 3600, 60)])
def test_catalog(family, m, order, deg):
    spec = reflection.catalog(family, m)
    assert spec.order == order and spec.schwarz_degree == deg


def test_imprimitive_and_du_val():
    assert reflection.catalog("G", 4, 2).order == 16
    assert [s.order for s in reflection.du_val_list()] == [2, 3, 4, 8, 12, 24, 48, 120]
    with pytest.raises(reflection.UnknownFamily):
        reflection.catalog("nonsense")


@pytest.mark.parametrize("family,m", [("g2m22", 2), ("g2m22", 4), ("tetrahedral", None),
                                      ("octahedral", None), ("icosahedral", None)])
def test_degree_and_triangle(family, m):
    rmap = reflection.schwarz_map(family, m)
    spec = reflection.catalog(family, m)
    rep = reflection.degree_by_preimages(rmap)
    assert rep.consistent and rep.degree == spec.schwarz_degree
    assert sorted(reflection.triangle_angles(rmap)) == sorted(spec.triangle)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_invariance(m):
    assert all(reflection.check_invariance(m).values())


def test_g222_pullback_both_forms():
    eta = np.random.default_rng(1).normal(size=50) + 1j * np.random.default_rng(2).normal(size=50)
    assert reflection.g222_pullback_deviation(eta, True).max() < 1e-12
    assert reflection.g222_pullback_deviation(eta, False).max() < 1e-12


def test_constant_recovery():
    rec = reflection.recover_m2_constant(50)
    assert rec.max_deviation() < 1e-9
    assert rec.a == pytest.approx(8 * math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_quotient_potential_pulls_back_to_euclidean(m):
    ratio = reflection.potential_pullback_ratio(m, 50)
    assert np.allclose(ratio, 1.0, rtol=1e-10)


def test_schwarz_quotient_metric_curvature():
    from conekit.spherical import curvature_check
    g = reflection.SchwarzQuotientMetric("octahedral")
    assert sorted(g.config.angles) == [F(1, 4), F(1, 3), F(1, 2)]
    K = curvature_check(g, n=5)
    assert np.max(np.abs(K - 4)) < 1e-4
