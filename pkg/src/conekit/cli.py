"""``conekit`` command-line entry point.

Every command builds a :class:`VerificationReport`, prints it (text, or JSON
with ``--json``), optionally writes the JSON to ``--out``, and exits with

    0  all checks passed
    1  some check failed
    2  usage error or malformed input
    3  file could not be read or written
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import curvesing, energy, flatcone, lift, reflection, spherical, suite
from .core import AdmissibilityError, ConeConfig, check_troyanov, format_number, parse_number
from .report import (CheckRecord, VerificationReport, bound_record, close_record, csv_text,
                     dumps, exact_record)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    return int(text, 0)


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _fraction_or_float(text: str):
    try:
        return parse_number(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


# ------------------------------------------------------------------ base metrics


def _add_base_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("base metric (curvature 4)")
    g.add_argument("--sol", help="solution file written by 'spherical solve --kappa 4'")
    g.add_argument("--rugby", type=float, metavar="BETA", help="closed-form rugby ball")
    g.add_argument("--family", dest="base_family", choices=["g222"], help="closed-form G(2,2,2) base")
    g.add_argument("--n", type=int, default=32, help="solver resolution when --config is given")


def _load_config(args) -> ConeConfig:
    data = _read_json(args.config)
    return ConeConfig.from_json(data.get("config", data))


def _load_base(args) -> spherical.ConformalMetric:
    if args.sol:
        sol = spherical.CapSolution.from_json(_read_json(args.sol))
        if abs(sol.kappa - 4.0) > 1e-12:
            raise UsageError("the base solution must have curvature 4")
        return sol
    if args.rugby is not None:
        return spherical.rugby_ball(args.rugby, 4.0)
    if args.base_family == "g222":
        return reflection.base_metric_G222()
    if args.config:
        return spherical.solve_liouville(_load_config(args), kappa=4.0,
                                         n_radial=args.n, n_angular=args.n)
    raise UsageError("choose a base with --sol, --rugby, --family or --config")


def _base_label(args) -> dict:
    return {k: getattr(args, k) for k in ("sol", "rugby", "base_family", "config")
            if getattr(args, k, None) is not None}


# ------------------------------------------------------------------ spherical


def cmd_spherical_solve(args) -> VerificationReport:
    if not args.config:
        raise UsageError("spherical solve needs --config")
    cfg = _load_config(args)
    sol = spherical.solve_liouville(cfg, kappa=args.kappa, n_radial=args.n_radial,
                                    n_angular=args.n_angular)
    rep = VerificationReport("spherical solve", {"config": cfg.to_json(), "kappa": args.kappa},
                             seed=args.seed)
    rep.add(bound_record("Newton residual", sol.report.residual, 1e-8))
    gb = args.kappa * spherical.total_area(sol).area / (2 * math.pi)
    rep.add(close_record("Gauss-Bonnet (1/2pi) int K dA = 2c", 2 * float(cfg.c), gb,
                         args.tol or 1e-3))
    rep.extra = {"solver": sol.report.__dict__}
    if args.solution_out:
        _write(args.solution_out, json.dumps(sol.to_json()))
    return rep


def cmd_spherical_check(args) -> VerificationReport:
    if args.sol:
        metric = spherical.CapSolution.from_json(_read_json(args.sol))
    elif args.rugby is not None:
        metric = spherical.rugby_ball(args.rugby, args.kappa)
    else:
        raise UsageError("spherical check needs --sol or --rugby")
    rep = VerificationReport("spherical check", _base_label(args), seed=args.seed)
    K = spherical.curvature_check(metric, n=args.points, seed=args.seed, step=1e-3)
    rep.add(bound_record(f"max |K - {metric.kappa:g}| ({args.points} points)",
                         float(np.max(np.abs(K - metric.kappa))), args.tol or 1e-4))
    area = spherical.total_area(metric)
    rep.add(close_record("area", area.expected, area.area, 1e-3, "paper"))
    return rep


def cmd_spherical_admissible(args) -> VerificationReport:
    angles = [parse_number(a) for a in args.angles.split(",")]
    res = check_troyanov(angles)
    rep = VerificationReport("spherical admissible", {"angles": [format_number(a) for a in angles]},
                             seed=args.seed)
    rep.add(CheckRecord("existence inequality", True, res.passed, "exact", res.passed, "paper"))
    rep.extra = {"slacks": res.slacks, "reason": res.reason}
    return rep


# ------------------------------------------------------------------ lift


def cmd_lift_hopf(args) -> VerificationReport:
    base = _load_base(args)
    rep = VerificationReport("lift hopf", _base_label(args), seed=args.seed)
    rep.extend(suite.lift_records("base", base))
    link = lift.hopf_lift(base)
    rep.extra = {
        "c": float(link.c),
        "fiber_length": 2 * math.pi * float(link.c),
        "holonomy": {suite._point(a): [[r, v] for r, v in link.connection.holonomy_table(a)]
                     for a, _ in link.connection.finite},
    }
    return rep


def cmd_lift_seifert(args) -> VerificationReport:
    base = _load_base(args)
    s = lift.seifert_pullback(lift.hopf_lift(base), args.p, args.q)
    rep = VerificationReport("lift seifert", {**_base_label(args), "p": args.p, "q": args.q},
                             seed=args.seed)
    vol = s.volume()
    rep.add(close_record("volume = pq * volume of the link", args.p * args.q * s.link.expected_volume(),
                         vol, args.tol or 1e-2, "derived"))
    rep.extra = {"axis_angles": [format_number(Fraction(a)) if not isinstance(a, float) else a
                                 for a in s.axis_angles],
                 "c_tilde": s.c_tilde}
    return rep


# ------------------------------------------------------------------ flat cone


def _flat_report(name: str, fc: flatcone.FlatConeMetric, args, inputs: dict) -> VerificationReport:
    rep = VerificationReport(name, inputs, seed=args.seed)
    vc = flatcone.volume_check(fc, n=args.points, seed=args.seed, step=1e-3)
    rep.add(bound_record(f"volume identity max relative error ({args.points} points)",
                         vc.max_relative_error, args.tol or 1e-3, "paper"))
    pts = flatcone.sample_points(fc, 100, np.random.default_rng(args.seed + 1))
    dev = max(flatcone.scaling_check(fc, lam, pts) for lam in (0.5, 2.0, math.e))
    closed = not isinstance(fc.base, spherical.CapSolution)
    rep.add(bound_record("scaling law max relative deviation", dev, 1e-6 if closed else 1e-4, "paper"))
    if args.csv:
        rows = [(f"{z.real:.17g}{z.imag:+.17g}j", f"{w.real:.17g}{w.imag:+.17g}j", m, p, e)
                for z, w, m, p, e in vc.rows()]
        _write(args.csv, csv_text(("z", "w", "density", "predicted", "relative_error"), rows))
    rep.extra = fc.describe()
    return rep


def cmd_flatcone_build(args) -> VerificationReport:
    fc = flatcone.build_flat_cone(_load_base(args))
    rep = VerificationReport("flatcone build", _base_label(args), seed=args.seed)
    r0 = float(fc.potential(0.0, 0.0)[0])
    rep.add(exact_record("r^2(0, 0) = 0", 0.0, r0, "trivial"))
    rep.extra = fc.describe()
    return rep


def cmd_flatcone_check(args) -> VerificationReport:
    fc = flatcone.build_flat_cone(_load_base(args))
    return _flat_report("flatcone check", fc, args, _base_label(args))


def cmd_flatcone_pullback(args) -> VerificationReport:
    fc = flatcone.seifert_flat_pullback(flatcone.build_flat_cone(_load_base(args)), args.p, args.q)
    rep = _flat_report("flatcone pullback", fc, args, {**_base_label(args), "p": args.p, "q": args.q})
    try:
        w = flatcone.seifert_weight(fc.base.config, args.p, args.q)
        rep.add(exact_record("weight = pq c", Fraction(fc.weight), w, "derived"))
    except AdmissibilityError:
        pass
    return rep


# ------------------------------------------------------------------ reflection


def cmd_reflection_catalog(args) -> VerificationReport:
    rep = VerificationReport("reflection catalog", {"family": args.group}, seed=args.seed)
    if args.group:
        specs = [reflection.catalog(args.group, args.m, args.p)]
    else:
        specs = [reflection.catalog("g2m22", m) for m in range(2, 7)]
        specs += [reflection.catalog(f) for f in ("tetrahedral", "octahedral", "icosahedral")]
        specs += reflection.du_val_list()
    rep.extra = {"groups": [s.to_json() for s in specs]}
    return rep


def cmd_reflection_verify(args) -> VerificationReport:
    spec = reflection.catalog(args.group, args.m)
    if spec.schwarz_degree is None:
        raise UsageError(f"{args.group} has no Schwarz map to verify")
    rmap = reflection.schwarz_map(args.group, args.m)
    rep = VerificationReport("reflection verify", {"family": args.group, "m": args.m}, seed=args.seed)
    deg = reflection.degree_by_preimages(rmap, seed=args.seed)
    rep.add(CheckRecord("Schwarz degree by preimage counting", spec.schwarz_degree, deg.degree,
                        "exact", deg.consistent and deg.degree == spec.schwarz_degree, "paper"))
    tri = reflection.triangle_angles(rmap)
    rep.add(exact_record("triangle angles", sorted(spec.triangle), sorted(tri), "paper"))
    if spec.family == "G(2m,2,2)":
        inv = reflection.check_invariance(args.m)
        rep.add(CheckRecord("invariants fixed by the group", True, all(inv.values()), "exact",
                            all(inv.values()), "derived"))
        if args.m == 2:
            rng = np.random.default_rng(args.seed)
            eta = rng.normal(size=200) + 1j * rng.normal(size=200)
            rep.add(bound_record("G(2,2,2) pullback max deviation",
                                 float(np.max(reflection.g222_pullback_deviation(eta))), 1e-9))
            rec = reflection.recover_m2_constant(200, args.seed)
            rep.add(CheckRecord("quotient potential constant a", 8 * math.sqrt(2), rec.a, 1e-9,
                                rec.max_deviation() <= 1e-9, "paper"))
    rep.extra = {"group": spec.to_json(), "map": rmap.to_json()}
    return rep


# ------------------------------------------------------------------ germ


def cmd_germ_analyze(args) -> VerificationReport:
    germ = curvesing.analyze_germ(args.poly)
    rep = VerificationReport("germ analyze", {"poly": args.poly}, seed=args.seed)
    lo, hi = germ.admissible_range()
    rep.extra = {
        "order": germ.order, "family": germ.family, "c0": format_number(germ.c0),
        "puiseux_ratio": None if germ.puiseux_ratio is None else format_number(germ.puiseux_ratio),
        "admissible_angles": [format_number(lo), format_number(hi)],
        "normal_form": curvesing.format_polynomial(germ.normal_form),
    }
    if args.expect is not None:
        rep.add(exact_record("c0", Fraction(args.expect), germ.c0, "paper"))
    return rep


def cmd_germ_threshold(args) -> VerificationReport:
    rep = VerificationReport("germ threshold", {"m": args.m, "n": args.n}, seed=args.seed)
    thr = curvesing.product_threshold(args.m, args.n)
    rep.add(CheckRecord("rescaling exponent vanishes at the threshold", "0",
                        format_number(curvesing.rescaling_exponent(args.m, args.n, thr).exponent),
                        "exact", curvesing.rescaling_exponent(args.m, args.n, thr).exponent == 0,
                        "derived"))
    rep.extra = {"threshold": format_number(thr),
                 "flat_cone_window": [format_number(x) for x in
                                      curvesing.flat_cone_angle_window(args.m, args.n)]}
    if args.beta is not None:
        v = curvesing.rescaling_exponent(args.m, args.n, args.beta)
        rep.extra.update({"beta": format_number(args.beta), "gamma": format_number(v.gamma),
                          "exponent": format_number(v.exponent), "verdict": v.verdict})
    return rep


# ------------------------------------------------------------------ energy


def cmd_energy_ledger(args) -> VerificationReport:
    spec = energy.arrangement(args.group, args.m)
    led = energy.arrangement_ledger(spec)
    rep = VerificationReport("energy ledger", {"family": args.group, "m": args.m}, seed=args.seed)
    rep.add(exact_record("residual E - sum t_r E_r", Fraction(0), led.residual, "derived"))
    if spec.expected_energy is not None:
        rep.add(exact_record("E", spec.expected_energy, led.total, "paper"))
    rep.extra = {"name": spec.name, "lines": spec.k, "beta": format_number(spec.beta),
                 "E": format_number(led.total), "residual": format_number(led.residual),
                 "rows": [{"r": r, "t_r": t, "E_r": format_number(e)} for r, t, e in led.rows()]}
    return rep


def cmd_energy_bishop_gromov(args) -> VerificationReport:
    if args.case != "cuspidal-cubic":
        raise UsageError("only --case cuspidal-cubic is available")
    res = energy.cuspidal_cubic_bishop_gromov(args.beta)
    rep = VerificationReport("energy bishop-gromov", {"case": args.case,
                                                      "beta": format_number(args.beta)},
                             seed=args.seed)
    rep.add(CheckRecord("volume ratio >= bound", format_number(res.bound), format_number(res.nu),
                        "exact", res.passed, "paper"))
    return rep


def cmd_energy_bookkeeping(args) -> VerificationReport:
    fn = {"elliptic": energy.elliptic_bookkeeping, "quartic": energy.quartic_bookkeeping}[args.case]
    b = fn(args.beta)
    rep = VerificationReport("energy bookkeeping", {"case": args.case,
                                                    "beta": format_number(args.beta)},
                             seed=args.seed)
    rep.add(exact_record("lost energy = bubbles", b.bubble_count * b.bubble, b.lost, "paper"))
    rep.extra = {"smooth": format_number(b.smooth), "limit": format_number(b.limit),
                 "bubble": format_number(b.bubble), "bubbles": b.bubble_count}
    return rep


# ------------------------------------------------------------------ suite


def cmd_suite(args) -> VerificationReport:
    only = [int(x) for x in args.only.split(",")] if args.only else None
    rep = VerificationReport("suite", {"quick": args.quick, "only": only}, seed=args.seed)
    lines = []
    for res in suite.run_suite(quick=args.quick, seed=args.seed, only=only):
        for r in res.records:
            r.name = f"[{res.number}] {r.name}"
            rep.add(r)
        rep.add(bound_record(f"[{res.number}] runtime (s)", res.elapsed, res.budget, "trivial"))
        lines.append(res.line())
        if not args.json:
            print(res.line(), flush=True)
    rep.extra = {"summary": lines}
    return rep


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the JSON report")
    common.add_argument("--out", "--report", dest="out", help="write the JSON report to a file")
    common.add_argument("--seed", type=_seed, default=suite.DEFAULT_SEED,
                        help="sampling seed (hex accepted, default 0x5EED)")
    common.add_argument("--tol", type=float, help="override the main tolerance")
    common.add_argument("--config", help="configuration JSON: {points, angles}")

    parser = argparse.ArgumentParser(prog="conekit", description="Cone-metric verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def group(name, help_):
        p = sub.add_parser(name, help=help_)
        return p.add_subparsers(dest="action", required=True)

    sph = group("spherical", "spherical cone metrics")
    p = sph.add_parser("solve", parents=[common])
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--n-radial", type=int, default=32)
    p.add_argument("--n-angular", type=int, default=32)
    p.add_argument("--solution-out", "--save", dest="solution_out", help="write the solution JSON")
    p.set_defaults(func=cmd_spherical_solve)
    p = sph.add_parser("check", parents=[common])
    p.add_argument("--sol")
    p.add_argument("--rugby", type=float, metavar="BETA")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_spherical_check)
    p = sph.add_parser("admissible", parents=[common])
    p.add_argument("--angles", required=True, help="comma separated, e.g. 1/2,2/3,2/3")
    p.set_defaults(func=cmd_spherical_admissible)

    lf = group("lift", "Hopf and Seifert lifts")
    p = lf.add_parser("hopf", parents=[common])
    _add_base_args(p)
    p.set_defaults(func=cmd_lift_hopf)
    p = lf.add_parser("seifert", parents=[common])
    _add_base_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_lift_seifert)

    fl = group("flatcone", "flat Kähler cones")
    for name, fn in (("build", cmd_flatcone_build), ("check", cmd_flatcone_check),
                     ("pullback", cmd_flatcone_pullback)):
        p = fl.add_parser(name, parents=[common])
        _add_base_args(p)
        p.add_argument("--points", type=int, default=50)
        p.add_argument("--csv", help="write per-point densities as CSV")
        if name == "pullback":
            p.add_argument("--p", type=int, required=True)
            p.add_argument("--q", type=int, required=True)
        p.set_defaults(func=fn)

    rf = group("reflection", "reflection groups and Schwarz maps")
    p = rf.add_parser("catalog", parents=[common])
    p.add_argument("--family", dest="group")
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int)
    p.set_defaults(func=cmd_reflection_catalog)
    p = rf.add_parser("verify", parents=[common])
    p.add_argument("--family", dest="group", required=True)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_reflection_verify)

    gm = group("germ", "plane curve germs")
    p = gm.add_parser("analyze", parents=[common])
    p.add_argument("--poly", required=True)
    p.add_argument("--expect", help="expected c0, e.g. 5/6")
    p.set_defaults(func=cmd_germ_analyze)
    p = gm.add_parser("threshold", parents=[common])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=_fraction_or_float)
    p.set_defaults(func=cmd_germ_threshold)

    en = group("energy", "energy identities")
    p = en.add_parser("ledger", parents=[common])
    p.add_argument("--family", dest="group", required=True)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_energy_ledger)
    p = en.add_parser("bishop-gromov", parents=[common])
    p.add_argument("--case", required=True)
    p.add_argument("--beta", type=_fraction_or_float, required=True)
    p.set_defaults(func=cmd_energy_bishop_gromov)
    p = en.add_parser("bookkeeping", parents=[common])
    p.add_argument("--case", choices=["elliptic", "quartic"], required=True)
    p.add_argument("--beta", type=_fraction_or_float, required=True)
    p.set_defaults(func=cmd_energy_bookkeeping)

    p = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    p.add_argument("--quick", action="store_true", help="smaller solver runs")
    p.add_argument("--only", help="comma separated criterion numbers")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        rep = args.func(args)
    except OSError as exc:
        print(f"conekit: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, AdmissibilityError, ValueError, KeyError) as exc:
        print(f"conekit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except spherical.ConvergenceError as exc:
        print(f"conekit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = dumps(rep.to_json())
    if args.out:
        try:
            _write(args.out, text + "\n")
        except OSError as exc:
            print(f"conekit: {exc}", file=sys.stderr)
            return EXIT_IO
    print(text if args.json else rep.text())
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
