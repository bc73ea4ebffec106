"""The nine acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.  Run directly with ``python tests/test_acceptance.py``
to get only the nine lines.
"""

from __future__ import annotations

import time
from fractions import Fraction as F

from hypothesis import HealthCheck, Phase, assume, given, settings, strategies as st

from conekit import suite
from conekit.core import INF, ConeConfig, check_troyanov
from conekit.report import bound_record

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def _report(result: suite.CriterionResult) -> None:
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    bad = result.failures()
    assert not bad, "\n".join(f"{r.name}: expected {r.expected}, got {r.computed} (tol {r.tolerance})"
                              for r in bad)


def test_criterion_1_arrangement_ledgers():
    _report(suite.criterion_arrangements())


def test_criterion_2_singularity_exponents():
    _report(suite.criterion_exponents())


def test_criterion_3_tangent_cone_threshold():
    _report(suite.criterion_threshold())


def test_criterion_4_rugby_curvature_and_area():
    _report(suite.criterion_rugby())


def test_criterion_5_reflection_groups():
    _report(suite.criterion_reflection())


def test_criterion_6_flat_cone_volume_and_scaling():
    _report(suite.criterion_flatcone())


# ---- criterion 7: d = 2 comparison plus Gauss-Bonnet as a property over admissible configurations

_angle = st.fractions(min_value=F(1, 12), max_value=F(11, 12), max_denominator=12)
_grid = st.builds(lambda i, j: complex(i / 4, j / 4), st.integers(-8, 8), st.integers(-8, 8))


@st.composite
def admissible_configs(draw):
    d = draw(st.integers(2, 5))
    if d == 2:
        b = draw(_angle)
        return ConeConfig((0, INF), (b, b))
    bs = draw(st.lists(_angle, min_size=d, max_size=d))
    assume(check_troyanov(bs).passed)
    pts = [0j, 1 + 0j]
    for _ in range(d - 3):
        p = draw(_grid)
        assume(all(abs(p - q) >= 0.3 for q in pts))
        pts.append(p)
    return ConeConfig(tuple(pts) + (INF,), tuple(bs))


def test_criterion_7_liouville_solver():
    t0 = time.perf_counter()
    records = []
    for beta in (0.3, 0.5, 0.8):
        records.append(bound_record(f"d=2 beta={beta}: regular-part sup error",
                                    suite.rugby_regular_error(beta), 1e-6))

    # each example is a full solve, so failures are reported unshrunk
    @settings(max_examples=12, deadline=None, derandomize=True, database=None,
              phases=[Phase.explicit, Phase.generate],
              suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
    @given(admissible_configs())
    def gauss_bonnet_holds(cfg):
        rec = suite.gauss_bonnet_record(cfg)
        records.append(rec)
        # a ConvergenceError is recorded as a failed check, so non-convergence fails here too
        assert rec.passed, f"{rec.name}: expected {rec.expected}, got {rec.computed}"

    try:
        gauss_bonnet_holds()
    except AssertionError:
        pass  # the failing record is already in ``records``
    _report(suite.CriterionResult(7, "Liouville solver", records, time.perf_counter() - t0, 300.0))


def test_criterion_8_lift_suite():
    _report(suite.criterion_lift())


def test_criterion_9_energy_bookkeeping():
    _report(suite.criterion_bookkeeping())


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
