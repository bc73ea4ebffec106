"""The acceptance battery: nine groups of checks with their tolerances and time budgets."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import curvesing, energy, flatcone, lift, reflection, spherical
from .core import ConeConfig, check_troyanov
from .report import CheckRecord, bound_record, close_record, exact_record

F = Fraction
DEFAULT_SEED = 0x5EED


@dataclass
class CriterionResult:
    number: int
    title: str
    records: list
    elapsed: float
    budget: float

    @property
    def within_budget(self) -> bool:
        return self.elapsed <= self.budget

    @property
    def passed(self) -> bool:
        return self.within_budget and all(r.passed for r in self.records)

    def failures(self) -> list:
        out = [r for r in self.records if not r.passed]
        if not self.within_budget:
            out.append(bound_record("runtime (s)", self.elapsed, self.budget, "trivial"))
        return out

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number}: {self.title} "
                f"({sum(r.passed for r in self.records)}/{len(self.records)} checks, "
                f"{self.elapsed:.1f}s of {self.budget:.0f}s)")


def _timed(number: int, title: str, budget: float, body) -> CriterionResult:
    t0 = time.perf_counter()
    records = body()
    return CriterionResult(number, title, records, time.perf_counter() - t0, budget)


# ------------------------------------------------------------------ 1: arrangement ledgers

ARRANGEMENT_ENERGIES = {"hesse": 30, "extended-hesse": 57, "icosahedral": 39, "g168": 57, "a6": 129}


def criterion_arrangements(quick: bool = False) -> CriterionResult:
    def body():
        recs = []
        for spec in energy.all_arrangements(range(2, 21)):
            led = energy.arrangement_ledger(spec)
            recs.append(exact_record(f"{spec.name} residual", F(0), led.residual, "derived"))
            if spec.name.startswith("A0"):
                m = spec.k // 3
                recs.append(exact_record(f"{spec.name} energy", F(9 * m - 6), led.total))
            elif spec.name.startswith("A3"):
                recs.append(exact_record(f"{spec.name} energy", spec.expected_energy, led.total, "derived"))
        for key, e in ARRANGEMENT_ENERGIES.items():
            led = energy.arrangement_ledger(energy.arrangement(key))
            recs.append(exact_record(f"{led.spec.name} energy", F(e), led.total))
        return recs

    return _timed(1, "arrangement energy ledgers", 1.0, body)


# ------------------------------------------------------------------ 2: singularity exponents


def criterion_exponents(quick: bool = False) -> CriterionResult:
    def body():
        recs = [exact_record("c0(w^2 - z^3)", F(5, 6), curvesing.analyze_germ("w^2 - z^3").c0)]
        for m, n in ((2, 5), (3, 4), (2, 7), (3, 5)):
            germ = curvesing.analyze_germ(f"w^{m} - z^{n}")
            recs.append(exact_record(f"c0(w^{m} - z^{n})", F(1, m) + F(1, n), germ.c0))
        for d in range(3, 9):
            germ = curvesing.analyze_germ(curvesing.ordinary_point(d))
            recs.append(exact_record(f"c0(ordinary {d}-fold point)", F(2, d), germ.c0))
        return recs

    return _timed(2, "singularity exponents", 1.0, body)


# ------------------------------------------------------------------ 3: tangent-cone threshold


def _sign_change(m: int, n: int, at: Fraction, eps=F(1, 10 ** 6)) -> bool:
    below = curvesing.rescaling_exponent(m, n, at - eps).exponent
    here = curvesing.rescaling_exponent(m, n, at).exponent
    above = curvesing.rescaling_exponent(m, n, at + eps).exponent if at + eps < 1 else None
    return below < 0 and here == 0 and (above is None or above > 0)


def criterion_threshold(quick: bool = False) -> CriterionResult:
    def body():
        recs = [CheckRecord("rescaling exponent of (2,3) changes sign at 5/6", "5/6",
                            str(curvesing.product_threshold(2, 3)), "exact",
                            _sign_change(2, 3, F(5, 6)) and curvesing.product_threshold(2, 3) == F(5, 6),
                            "paper")]
        for m in range(2, 6):
            for n in range(m + 1, 10):
                thr = F(1) - F(1, m) + F(1, n)
                recs.append(CheckRecord(f"threshold ({m},{n})", thr, curvesing.product_threshold(m, n),
                                        "exact", _sign_change(m, n, thr)
                                        and curvesing.product_threshold(m, n) == thr, "derived"))
        return recs

    return _timed(3, "tangent-cone threshold", 1.0, body)


# ------------------------------------------------------------------ 4: rugby ball


def criterion_rugby(quick: bool = False, seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        recs = []
        for beta in (0.3, 0.5, 0.8):
            g = spherical.rugby_ball(beta, 1.0)
            K = spherical.curvature_check(g, n=100, seed=seed, step=1e-3)
            recs.append(bound_record(f"rugby {beta}: max |K - 1| (100 points)",
                                     float(np.max(np.abs(K - 1))), 1e-4, "paper"))
            area = spherical.total_area(g).area
            recs.append(close_record(f"rugby {beta}: area", 4 * math.pi * beta, area, 1e-3))
        return recs

    return _timed(4, "rugby-ball curvature and area", 10.0, body)


# ------------------------------------------------------------------ 5: reflection groups


def criterion_reflection(quick: bool = False, seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        recs = []
        cases = [("g2m22", m, 2 * m) for m in range(2, 7)]
        cases += [("tetrahedral", None, 12), ("octahedral", None, 24), ("icosahedral", None, 60)]
        for fam, m, deg in cases:
            rep = reflection.degree_by_preimages(reflection.schwarz_map(fam, m), seed=seed)
            label = fam if m is None else f"{fam} m={m}"
            recs.append(CheckRecord(f"Schwarz degree {label}", deg, rep.degree, "exact",
                                    rep.consistent and rep.degree == deg, "paper"))
        rng = np.random.default_rng(seed)
        eta = rng.normal(size=200) + 1j * rng.normal(size=200)
        dev = float(np.max(reflection.g222_pullback_deviation(eta)))
        recs.append(bound_record("G(2,2,2) pullback max deviation (200 points)", dev, 1e-9))
        rec = reflection.recover_m2_constant(200, seed)
        recs.append(CheckRecord("quotient potential constant a", 8 * math.sqrt(2), rec.a, 1e-9,
                                rec.max_deviation() <= 1e-9, "paper"))
        return recs

    return _timed(5, "reflection-group suite", 30.0, body)


# ------------------------------------------------------------------ 6: flat cone


def _flat_records(label: str, fc: flatcone.FlatConeMetric, seed: int, scale_tol: float) -> list:
    vc = flatcone.volume_check(fc, n=50, seed=seed, step=1e-3)
    recs = [bound_record(f"{label}: volume identity max relative error (50 points)",
                         vc.max_relative_error, 1e-3, "paper")]
    pts = flatcone.sample_points(fc, 100, np.random.default_rng(seed + 1))
    dev = max(flatcone.scaling_check(fc, lam, pts) for lam in (0.5, 2.0, math.e))
    recs.append(bound_record(f"{label}: scaling law max relative deviation", dev, scale_tol, "paper"))
    return recs


def solver_flat_base(n: int = 32) -> spherical.CapSolution:
    cfg = ConeConfig((0, 1, "inf"), (F(1, 2), F(2, 3), F(2, 3)))
    return spherical.solve_liouville(cfg, kappa=4.0, n_radial=n, n_angular=n)


def criterion_flatcone(quick: bool = False, seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        recs = []
        for beta in (0.4, 0.7):
            fc = flatcone.build_flat_cone(spherical.rugby_ball(beta, 4.0))
            recs += _flat_records(f"C_{beta} x C_{beta}", fc, seed, 1e-6)
        base = solver_flat_base(24 if quick else 32)
        recs += _flat_records("solver base (1/2, 2/3, 2/3)", flatcone.build_flat_cone(base), seed, 1e-4)
        return recs

    return _timed(6, "flat-cone volume identity and scaling", 60.0, body)


# ------------------------------------------------------------------ 7: solver


def rugby_regular_error(beta: float, n_radial: int = 32, n_angular: int = 16,
                        seed: int = DEFAULT_SEED) -> float:
    """Sup over sample points of ``|u_solver - u_rugby|`` in both charts."""
    cfg = ConeConfig((0, "inf"), (beta, beta))
    sol = spherical.solve_liouville(cfg, kappa=1.0, n_radial=n_radial, n_angular=n_angular)
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(math.log(1e-3), 0, 200))
    z = r * np.exp(2j * math.pi * rng.uniform(size=200))
    err = 0.0
    for chart in ("xi", "eta"):
        diff = sol.regular_part(z, chart) - spherical.rugby_regular_part(beta, 1.0, z)
        err = max(err, float(np.max(np.abs(diff))))
    return err


def random_admissible_configs(count: int, seed: int, max_d: int = 5) -> list:
    """Admissible configurations with angles in twelfths and separated points."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = int(rng.integers(2, max_d + 1))
        if d == 2:
            b = F(int(rng.integers(1, 12)), 12)
            out.append(ConeConfig((0, "inf"), (b, b)))
            continue
        bs = [F(int(rng.integers(1, 12)), 12) for _ in range(d)]
        if not check_troyanov(bs).passed:
            continue
        pts = [0j, 1 + 0j, "inf"]
        while len(pts) < d:
            p = complex(*rng.uniform(-2, 2, 2))
            if all(abs(p - q) > 0.3 for q in pts if q != "inf"):
                pts.append(p)
        out.append(ConeConfig(tuple(pts), tuple(bs)))
    return out


def gauss_bonnet_record(cfg: ConeConfig, n: int | None = None) -> CheckRecord:
    """Solve at curvature 1 and compare ``(1/2 pi) * integral of K dA`` with ``2c``.

    The tolerance is absolute.  Near the admissibility boundary ``c`` is
    small and the error of a fixed grid is roughly constant in absolute
    terms, so the default grid is refined when ``c < 0.05``.
    """
    label = f"Gauss-Bonnet {[str(b) for b in cfg.angles]}"
    if n is None:
        n = 24 if float(cfg.c) >= 0.05 else 32
    try:
        sol = spherical.solve_liouville(cfg, kappa=1.0, n_radial=n, n_angular=n)
    except spherical.ConvergenceError as exc:
        return CheckRecord(label, 2 * float(cfg.c), f"no convergence ({exc})", 1e-3, False, "paper")
    return close_record(label, 2 * float(cfg.c), spherical.gauss_bonnet(sol), 1e-3, relative=False)


def criterion_solver(quick: bool = False, seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        recs = []
        for beta in ((0.5,) if quick else (0.3, 0.5, 0.8)):
            recs.append(bound_record(f"d=2 beta={beta}: regular-part sup error",
                                     rugby_regular_error(beta, seed=seed), 1e-6))
        for cfg in random_admissible_configs(2 if quick else 8, seed):
            recs.append(gauss_bonnet_record(cfg))
        return recs

    return _timed(7, "Liouville solver", 300.0, body)


# ------------------------------------------------------------------ 8: lift


def _point(a: complex) -> str:
    return f"{a.real:g}" if a.imag == 0 else f"{a:g}"


def lift_records(label: str, base: spherical.ConformalMetric) -> list:
    conn = lift.build_connection(base)
    link = lift.hopf_lift(base, conn)
    recs = [close_record(f"{label}: Hopf volume", link.expected_volume(), link.volume(), 1e-3),
            close_record(f"{label}: total curvature (quadrature)", 1.0,
                         conn.total_curvature_quadrature(), 1e-3),
            close_record(f"{label}: total curvature (Stokes)", 1.0,
                         conn.total_curvature_stokes(), 1e-3, "derived")]
    for a, _ in conn.finite:
        table = conn.holonomy_table(a)
        recs.append(CheckRecord(f"{label}: holonomy at {_point(a)} decreasing, final < 1e-2",
                                "decreasing", [abs(v) for _, v in table], 1e-2,
                                lift.holonomy_decreasing(table, 1e-2), "paper"))
    return recs


def criterion_lift(quick: bool = False) -> CriterionResult:
    def body():
        return (lift_records("rugby 0.6", spherical.rugby_ball(0.6, 4.0))
                + lift_records("G(2,2,2) base", reflection.base_metric_G222()))

    return _timed(8, "Hopf lift suite", 120.0, body)


# ------------------------------------------------------------------ 9: energy bookkeeping


def rational_samples(count: int, seed: int, low=F(1, 2), high=F(1)) -> list:
    """Distinct rationals in the open interval ``(low, high)``."""
    rng = np.random.default_rng(seed)
    out = set()
    while len(out) < count:
        q = int(rng.integers(2, 200))
        p = int(rng.integers(1, q))
        b = F(p, q)
        if low < b < high:
            out.add(b)
    return sorted(out)


def criterion_bookkeeping(quick: bool = False, seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        recs = []
        betas = rational_samples(50, seed)
        ell = [energy.elliptic_bookkeeping(b) for b in betas]
        qua = [energy.quartic_bookkeeping(b) for b in betas]
        ok = all(e.smooth == 3 and e.limit == 3 * b * b and e.lost == 3 * (1 - b * b) and e.balanced
                 for e, b in zip(ell, betas))
        recs.append(CheckRecord("elliptic: 3 - 3 beta^2 = 3 (1 - beta^2), 50 rationals",
                                True, ok, "exact", ok, "paper"))
        ok = all(q.smooth == 7 - 4 * b and q.limit == 4 * b - 1 and q.lost == 8 * (1 - b) and q.balanced
                 for q, b in zip(qua, betas))
        recs.append(CheckRecord("quartic: (7 - 4 beta) - (4 beta - 1) = 8 (1 - beta), 50 rationals",
                                True, ok, "exact", ok, "paper"))
        scan = [F(5, 6) + F(k, 600) for k in range(1, 101)]
        passing = [b for b in scan if energy.cuspidal_cubic_bishop_gromov(b).passed]
        recs.append(CheckRecord("cuspidal cubic Bishop-Gromov passes only at beta = 1 on (5/6, 1]",
                                ["1"], [str(b) for b in passing], "exact", passing == [F(1)], "paper"))
        return recs

    return _timed(9, "energy bookkeeping", 1.0, body)


CRITERIA = (criterion_arrangements, criterion_exponents, criterion_threshold, criterion_rugby,
            criterion_reflection, criterion_flatcone, criterion_solver, criterion_lift,
            criterion_bookkeeping)


def run_suite(quick: bool = False, seed: int = DEFAULT_SEED, only=None) -> list:
    results = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        kw = {"quick": quick}
        if "seed" in fn.__code__.co_varnames:
            kw["seed"] = seed
        results.append(fn(**kw))
    return results
