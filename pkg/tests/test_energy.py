from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conekit import energy
from frozen_values import A3_ENERGY


@pytest.mark.parametrize("key,e", [("hesse", 30), ("extended-hesse", 57), ("icosahedral", 39),
                                   ("g168", 57), ("a6", 129)])
def test_fixed_arrangements(key, e):
    led = energy.arrangement_ledger(energy.arrangement(key))
    assert led.total == e and led.balanced


@given(st.integers(2, 20))
def test_a0_family(m):
    led = energy.arrangement_ledger(energy.arrangement_a0(m))
    assert led.total == 9 * m - 6 and led.residual == 0


@pytest.mark.parametrize("m", sorted(A3_ENERGY))
def test_a3_family_against_oracle(m):
    led = energy.arrangement_ledger(energy.arrangement_a3(m))
    assert led.total == A3_ENERGY[m] and led.residual == 0


def test_pair_count_validation():
    bad = energy.ArrangementSpec("bad", 4, {2: 5}, F(1, 2))
    with pytest.raises(ValueError):
        energy.arrangement_ledger(bad)


beta = st.fractions(min_value=F(1, 2), max_value=1, max_denominator=500).filter(lambda b: F(1, 2) < b < 1)


@given(beta)
def test_bookkeeping_identities(b):
    e = energy.elliptic_bookkeeping(b)
    q = energy.quartic_bookkeeping(b)
    assert e.lost == 3 * (1 - b * b) and e.balanced
    assert q.smooth - q.limit == 8 * (1 - b) and q.balanced


@given(st.fractions(min_value=F(5, 6), max_value=1, max_denominator=1000))
def test_cuspidal_bishop_gromov(b):
    if b == F(5, 6):
        return
    assert energy.cuspidal_cubic_bishop_gromov(b).passed == (b == 1)
