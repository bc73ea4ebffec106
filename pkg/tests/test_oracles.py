"""The frozen literals agree with a fresh run of the sympy derivations."""

import importlib.util
import math
from pathlib import Path

import pytest
import sympy as sp

import frozen_values as fv

_spec = importlib.util.spec_from_file_location("derive_values", Path(__file__).parent / "oracles" / "derive_values.py")
derive = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(derive)


def test_unit_loop():
    assert float(derive.rugby_unit_loop(sp.Rational(3, 10))) == fv.RUGBY_UNIT_LOOP


def test_holonomy_table():
    for r, v in fv.RUGBY_HOLONOMY_HALF.items():
        exact = float(derive.rugby_holonomy(sp.Rational(1, 2), sp.Rational(1, round(1 / r))))
        assert exact == pytest.approx(v, rel=1e-15)


def test_product_density():
    got = float(derive.product_volume_density(sp.Rational(2, 5), 1, 1 + sp.I))
    assert got == pytest.approx(fv.PRODUCT_DENSITY_04_AT_1_1PI, rel=1e-15)


def test_a3_and_weights():
    assert {m: derive.a3_energy(m) for m in fv.A3_ENERGY} == fv.A3_ENERGY
    assert derive.cusp_seifert_weight() == fv.CUSP_SEIFERT_WEIGHT
    assert float(derive.rugby_area(sp.Rational(1, 2), 1)) == pytest.approx(fv.RUGBY_AREA_HALF_K1, rel=1e-15)
    assert math.isclose(float(derive.rugby_area(sp.Rational(3, 10), 4)), fv.RUGBY_AREA_03_K4, rel_tol=1e-15)
