"""Rank-two unitary reflection groups, their rational Schwarz maps and quotient metrics.

Each rational map here is a Galois branched cover of the projective line
whose branching data is that of a spherical triangle; pushing the round
metric of curvature 4 forward gives a closed-form spherical metric with
three cone points.  Exact checks (degrees, critical points, invariance) use
sympy; metric checks are numerical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy

from .core import ConeConfig, INF
from .spherical import ClosedFormMetric

F = Fraction
T, ETA = sympy.symbols("t eta")
X1, X2 = sympy.symbols("x1 x2")
SQRT_M3 = sympy.sqrt(-3)


class UnknownFamily(KeyError):
    pass


# ------------------------------------------------------------------ catalog


@dataclass(frozen=True)
class GroupSpec:
    family: str
    params: tuple
    order: int
    invariant_degrees: tuple
    schwarz_degree: int | None = None
    triangle: tuple | None = None
    quotient: str = ""
    singular_lines: tuple = ()

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": list(self.params),
            "order": self.order,
            "invariant_degrees": list(self.invariant_degrees),
            "schwarz_degree": self.schwarz_degree,
            "triangle": None if self.triangle is None else [str(b) for b in self.triangle],
            "quotient": self.quotient,
            "singular_lines": [[name, str(b)] for name, b in self.singular_lines],
        }


DU_VAL = {
    "C": ("A_{m-1}", "w^2 + t^2 = z^m"),
    "D": ("D_{m+2}", "t^2 + z w^2 = z^(m+1)"),
    "T": ("E6", "t^2 + w^3 = z^4"),
    "O": ("E7", "t^2 + w^3 = w z^3"),
    "I": ("E8", "t^2 + w^3 = z^5"),
}


def _norm_family(family: str) -> str:
    key = family.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
    aliases = {
        "g": "imprimitive", "gmp2": "imprimitive", "imprimitive": "imprimitive",
        "g2m22": "g2m22", "tetrahedral": "tetrahedral", "t": "tetrahedral",
        "octahedral": "octahedral", "o": "octahedral",
        "icosahedral": "icosahedral", "i": "icosahedral",
        "cyclic": "duval-c", "c": "duval-c", "dihedral": "duval-d", "d": "duval-d",
        "binarytetrahedral": "duval-t", "binaryoctahedral": "duval-o",
        "binaryicosahedral": "duval-i", "duvalc": "duval-c", "duvald": "duval-d",
        "duvalt": "duval-t", "duvalo": "duval-o", "duvali": "duval-i",
    }
    if key not in aliases:
        raise UnknownFamily(f"unknown family {family!r}")
    return aliases[key]


def catalog(family: str, m: int | None = None, p: int | None = None) -> GroupSpec:
    """Group data: order, invariant degrees, Schwarz-map degree and triangle."""
    fam = _norm_family(family)
    if fam == "imprimitive":
        if m is None or p is None:
            raise ValueError("G(m, p, 2) needs m and p")
        if m < 2 or p < 1 or m % p:
            raise ValueError("need m >= 2 and p dividing m")
        order = 2 * m * m // p
        curve = "w^2 = z^m" if p == m else ""
        return GroupSpec("G(m,p,2)", (m, p), order, (m, 2 * m // p), quotient=curve)
    if fam == "g2m22":
        if m is None or m < 2:
            raise ValueError("G(2m, 2, 2) needs m >= 2")
        tri = (F(1, 2), F(1, 2), F(1, m))
        lines = (("v = 0", F(1, 2)), ("u = v", F(1, 2)), ("u = 0", F(1, m)))
        return GroupSpec("G(2m,2,2)", (m,), 4 * m * m, (2 * m, 2 * m), 2 * m, tri,
                         "cone angle pi along v = 0 and u = v, 2 pi / m along u = 0", lines)
    if fam == "tetrahedral":
        return GroupSpec("tetrahedral", (), 144, (12, 12), 12, (F(1, 2), F(1, 3), F(1, 3)))
    if fam == "octahedral":
        return GroupSpec("octahedral", (), 576, (24, 24), 24, (F(1, 2), F(1, 3), F(1, 4)))
    if fam == "icosahedral":
        return GroupSpec("icosahedral", (), 3600, (60, 60), 60, (F(1, 2), F(1, 3), F(1, 5)))
    # Du Val subgroups of SU(2)
    letter = fam[-1].upper()
    name, surface = DU_VAL[letter]
    if letter in "CD":
        if m is None or m < 2:
            raise ValueError("cyclic and binary dihedral groups need m >= 2")
        order = m if letter == "C" else 4 * m
        name = name.replace("m-1", str(m - 1)).replace("m+2", str(m + 2))
        surface = surface.replace("m+1", str(m + 1)).replace("^m", f"^{m}")
        return GroupSpec(f"Du Val {letter}", (m,), order, (), quotient=f"{name}: {surface}")
    order = {"T": 24, "O": 48, "I": 120}[letter]
    return GroupSpec(f"Du Val {letter}", (), order, (), quotient=f"{name}: {surface}")


# ------------------------------------------------------------------ rational maps


@dataclass(frozen=True)
class RationalMap:
    """``H(t)`` composed with ``t = eta^power``; exact coefficients."""

    name: str
    num: sympy.Expr
    den: sympy.Expr
    power: int
    degree: int
    extension: tuple = ()

    def _domain_kw(self) -> dict:
        return {"extension": list(self.extension)} if self.extension else {}

    def polys_eta(self):
        kw = self._domain_kw()
        n = sympy.Poly(sympy.expand(self.num.subs(T, ETA ** self.power)), ETA, **kw)
        d = sympy.Poly(sympy.expand(self.den.subs(T, ETA ** self.power)), ETA, **kw)
        return n, d

    def _numeric(self):
        return _numeric_coeffs(self)

    def __call__(self, eta):
        eta = np.asarray(eta, dtype=complex)
        nc, dc, *_ = self._numeric()
        return np.polyval(nc, eta) / np.polyval(dc, eta)

    def derivative(self, eta):
        eta = np.asarray(eta, dtype=complex)
        nc, dc, ndc, ddc = self._numeric()
        n, d = np.polyval(nc, eta), np.polyval(dc, eta)
        return (np.polyval(ndc, eta) * d - n * np.polyval(ddc, eta)) / d ** 2

    def t_coeffs(self):
        kw = self._domain_kw()
        n = sympy.Poly(self.num, T, **kw)
        d = sympy.Poly(self.den, T, **kw)
        to_c = lambda P: np.array([complex(sympy.N(c, 30)) for c in P.all_coeffs()])
        return to_c(n), to_c(d)

    def to_json(self) -> dict:
        return {"name": self.name, "numerator": str(self.num), "denominator": str(self.den),
                "substitution": f"t = eta^{self.power}", "degree": self.degree}


_NUMERIC_CACHE: dict = {}


def _numeric_coeffs(rmap: RationalMap):
    key = (rmap.name, str(rmap.num), str(rmap.den), rmap.power)
    if key not in _NUMERIC_CACHE:
        n, d = rmap.polys_eta()
        to_c = lambda P: np.array([complex(sympy.N(c, 30)) for c in P.all_coeffs()])
        nc, dc = to_c(n), to_c(d)
        _NUMERIC_CACHE[key] = (nc, dc, np.polyder(nc), np.polyder(dc))
    return _NUMERIC_CACHE[key]


def schwarz_map(family: str, m: int | None = None) -> RationalMap:
    fam = _norm_family(family)
    if fam in ("g2m22", "imprimitive"):
        if m is None or m < 2:
            raise ValueError("G(2m, 2, 2) map needs m >= 2")
        return RationalMap(f"G({2 * m},2,2)", 4 * T, (1 + T) ** 2, m, 2 * m)
    if fam == "tetrahedral":
        return RationalMap("tetrahedral", (T ** 2 + 2 * SQRT_M3 * T + 1) ** 3,
                           T * (T ** 2 - 1) ** 2, 2, 12, (SQRT_M3,))
    if fam == "octahedral":
        return RationalMap("octahedral", (T ** 2 + 14 * T + 1) ** 3,
                           (T ** 3 - 33 * T ** 2 - 33 * T + 1) ** 2, 4, 24)
    if fam == "icosahedral":
        return RationalMap("icosahedral", (T ** 4 - 228 * T ** 3 + 494 * T ** 2 + 228 * T + 1) ** 3,
                           (T ** 6 + 522 * T ** 5 - 10005 * T ** 4 - 10005 * T ** 2 - 522 * T + 1) ** 2,
                           5, 60)
    raise UnknownFamily(f"no Schwarz map for {family!r}")


# ------------------------------------------------------------------ exact degree and critical points


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    values: tuple
    coprime: bool
    squarefree: tuple
    numeric_counts: tuple

    @property
    def consistent(self) -> bool:
        return (self.coprime and all(self.squarefree)
                and all(c == self.degree for c in self.numeric_counts))


def degree_by_preimages(rmap: RationalMap, values=None, trials: int = 3,
                        seed: int = 0x5EED) -> DegreeReport:
    """Count preimages of generic rational values exactly and numerically.

    For a value ``c`` the preimages are the roots of ``N - c D``.  The value is
    accepted only if that polynomial is square-free (exact gcd with its
    derivative), so the root count equals its degree.  A floating-point root
    finder must find the same number of well-separated roots.
    """
    n, d = rmap.polys_eta()
    coprime = sympy.gcd(n, d).degree() == 0
    rng = np.random.default_rng(seed)
    chosen, counts, sqf = [], [], []
    pending = list(values) if values is not None else []
    while len(chosen) < trials:
        if pending:
            c = sympy.Rational(pending.pop(0))
        else:
            c = sympy.Rational(int(rng.integers(1, 997)), int(rng.integers(1, 97)))
        P = n - d * c
        if P.degree() <= 0:
            continue
        if sympy.gcd(P, P.diff(ETA)).degree() != 0:
            continue
        coeffs = np.array([complex(sympy.N(a, 30)) for a in P.all_coeffs()])
        roots = np.roots(coeffs)
        sep = min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]) if len(roots) > 1 else 1.0
        chosen.append(str(c))
        sqf.append(True)
        counts.append(len(roots) if sep > 1e-8 else -1)
    deg = max(n.degree(), d.degree())
    return DegreeReport(deg, tuple(chosen), coprime, tuple(sqf), tuple(counts))


@dataclass(frozen=True)
class CriticalPoint:
    point: complex | str
    order: int
    value: complex | str


def critical_points(rmap: RationalMap, cluster_tol: float = 1e-6) -> list:
    """Critical points with exact orders, from the Wronskian ``N'D - ND'``.

    The order at infinity is whatever Riemann-Hurwitz leaves over.
    """
    n, d = rmap.polys_eta()
    W = n.diff(ETA) * d - n * d.diff(ETA)
    deg = max(n.degree(), d.degree())
    out = []
    finite_total = 0
    nc, dc, *_ = rmap._numeric()
    for factor, mult in W.sqf_list()[1]:
        coeffs = np.array([complex(sympy.N(a, 30)) for a in factor.all_coeffs()])
        for r in np.roots(coeffs) if len(coeffs) > 1 else []:
            dv = np.polyval(dc, r)
            val = "inf" if abs(dv) < 1e-9 * max(1.0, abs(np.polyval(nc, r))) else complex(np.polyval(nc, r) / dv)
            out.append(CriticalPoint(complex(r), int(mult), val))
        finite_total += mult * factor.degree()
    inf_order = 2 * deg - 2 - finite_total
    if inf_order > 0:
        if n.degree() > d.degree():
            val = "inf"
        elif n.degree() < d.degree():
            val = 0j
        else:
            val = complex(n.LC() / d.LC())
        out.append(CriticalPoint("inf", inf_order, val))
    return out


def branching_data(rmap: RationalMap, tol: float = 1e-6) -> list:
    """``(critical value, local degree, number of points)`` grouped by value."""
    groups: list = []
    for cp in critical_points(rmap):
        placed = False
        for g in groups:
            if _same_value(g[0], cp.value, tol):
                g[1].append(cp.order + 1)
                placed = True
                break
        if not placed:
            groups.append([cp.value, [cp.order + 1]])
    out = []
    for val, degs in groups:
        if len(set(degs)) != 1:
            raise ArithmeticError(f"non-uniform branching over {val}: {degs}")
        e = degs[0]
        out.append((val, e, len(degs)))
    return out


def _same_value(a, b, tol) -> bool:
    if a == "inf" or b == "inf":
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def triangle_angles(rmap: RationalMap) -> tuple:
    """Angles (in units of pi) of the triangle the map uniformizes: ``1/e`` per critical value."""
    data = branching_data(rmap)
    deg = max(p.degree() for p in rmap.polys_eta())
    for _, e, count in data:
        if e * count != deg:
            raise ArithmeticError("map is not a regular branched cover")
    return tuple(sorted((F(1, e) for _, e, _ in data), reverse=True))


def third_critical_value(rmap: RationalMap) -> complex:
    """The critical value other than 0 and infinity."""
    for val, _, _ in branching_data(rmap):
        if val != "inf" and abs(val) > 1e-9:
            return complex(val)
    raise ArithmeticError("map has no third critical value")


# ------------------------------------------------------------------ invariance


def invariants_G_mm2(m: int):
    z = X1 * X2
    w = (X1 ** m + X2 ** m) / 2
    return z, w


def check_invariance(m: int) -> dict:
    """Exact check that the generators of G(m,m,2) fix z and w, and G(2m,2,2) fixes u, v.

    Roots of unity are handled symbolically modulo the cyclotomic polynomial.
    """
    om = sympy.Symbol("omega")
    z, w = invariants_G_mm2(m)

    def reduce_mod(expr, n):
        cyc = sympy.Poly(sympy.cyclotomic_poly(n, om), om)
        num, den = sympy.fraction(sympy.together(sympy.expand(expr)))
        nr = sympy.Poly(sympy.expand(num), om).rem(cyc).as_expr()
        dr = sympy.Poly(sympy.expand(den), om).rem(cyc).as_expr()
        return sympy.simplify(nr / dr)

    def act(expr, a, b, swap=False):
        if swap:
            return expr.subs({X1: X2, X2: X1}, simultaneous=True)
        return expr.subs({X1: a * X1, X2: b * X2}, simultaneous=True)

    res = {}
    res["rotation fixes z"] = reduce_mod(act(z, om, 1 / om) - z, m) == 0
    res["rotation fixes w"] = reduce_mod(act(w, om, 1 / om) - w, m) == 0
    res["swap fixes z"] = sympy.expand(act(z, 0, 0, True) - z) == 0
    res["swap fixes w"] = sympy.expand(act(w, 0, 0, True) - w) == 0
    u, v = z ** m, w ** 2
    res["scalar fixes u"] = reduce_mod(act(u, om, om) - u, 2 * m) == 0
    res["scalar fixes v"] = reduce_mod(act(v, om, om) - v, 2 * m) == 0
    res["scalar negates w"] = reduce_mod(act(w, om, om) + w, 2 * m) == 0
    return res


# ------------------------------------------------------------------ closed-form quotient metrics


def g222_log_factor(xi) -> np.ndarray:
    """Curvature-4 metric with angle pi at 0, 1 and infinity."""
    xi = np.asarray(xi, dtype=complex)
    a, b = np.abs(xi), np.abs(xi - 1)
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(0.125 / (a * b + a * a * b + a * b * b))


def base_metric_G222() -> ClosedFormMetric:
    cfg = ConeConfig((0, 1, INF), (F(1, 2), F(1, 2), F(1, 2)))
    return ClosedFormMetric(cfg, 4.0, g222_log_factor, name="G(2,2,2)")


def g222_pullback_deviation(points, use_reciprocal: bool = True) -> np.ndarray:
    """``|Psi^* g / round - 1|`` at the given eta.

    With ``use_reciprocal`` the map is ``xi = (1 + eta^2)^2 / (4 eta^2)``; otherwise
    ``xi = 4 eta^2 / (1 + eta^2)^2``.  The metric is invariant under ``xi -> 1/xi``
    so both must give the round metric.
    """
    eta = np.asarray(points, dtype=complex)
    if use_reciprocal:
        xi = (1 + eta ** 2) ** 2 / (4 * eta ** 2)
        dxi = (1 + eta ** 2) * (eta ** 2 - 1) / (2 * eta ** 3)
    else:
        xi = 4 * eta ** 2 / (1 + eta ** 2) ** 2
        dxi = 8 * eta * (1 - eta ** 2) / (1 + eta ** 2) ** 3
    pulled = np.exp(2 * g222_log_factor(xi)) * np.abs(dxi) ** 2
    round_ = (1 + np.abs(eta) ** 2) ** -2
    return np.abs(pulled / round_ - 1)


class SchwarzQuotientMetric(ClosedFormMetric):
    """Push-forward of the curvature-4 round metric by a Schwarz map, rescaled so its
    critical values sit at 0, 1, infinity."""

    def __init__(self, family: str, m: int | None = None):
        self.rmap = schwarz_map(family, m)
        fam = _norm_family(family)
        if fam in ("g2m22", "imprimitive"):
            self.scale = 1.0 + 0j
        else:
            self.scale = third_critical_value(self.rmap)
        angles = {}
        for val, e, _ in branching_data(self.rmap):
            if val == "inf":
                angles[INF] = F(1, e)
            elif abs(val) < 1e-9:
                angles[0j] = F(1, e)
            else:
                angles[1 + 0j] = F(1, e)
        cfg = ConeConfig((0, 1, INF), (angles[0j], angles[1 + 0j], angles[INF]))
        self._tn, self._td = self.rmap.t_coeffs()
        H = self.rmap.num / self.rmap.den
        self._H = sympy.lambdify(T, H, "numpy")
        self._dH = sympy.lambdify(T, sympy.diff(H, T), "numpy")
        super().__init__(cfg, 4.0, self._phi, name=self.rmap.name)

    def preimage(self, xi) -> np.ndarray:
        """Some ``t = eta^s`` with ``H(t) / scale = xi`` for each input.

        Roots of ``N(t) - w D(t)`` come from batched companion matrices and are
        polished by Newton on the factored form of ``H``, which keeps relative
        accuracy near the multiple roots of ``N`` and ``D``.
        """
        w = np.atleast_1d(np.asarray(xi, dtype=complex)).ravel() * self.scale
        k = max(len(self._tn), len(self._td))
        tn = np.pad(self._tn, (k - len(self._tn), 0))
        td = np.pad(self._td, (k - len(self._td), 0))
        coeffs = tn[None, :] - w[:, None] * td[None, :]
        lead = coeffs[:, 0]
        if np.any(np.abs(lead) < 1e-300):
            raise ArithmeticError("preimage at infinity")
        comp = np.zeros((len(w), k - 1, k - 1), dtype=complex)
        comp[:, 0, :] = -coeffs[:, 1:] / lead[:, None]
        if k > 2:
            comp[:, np.arange(1, k - 1), np.arange(k - 2)] = 1.0
        roots = np.linalg.eigvals(comp)
        t = roots[np.arange(len(w)), np.argmin(np.abs(roots), axis=1)]
        with np.errstate(all="ignore"):
            for _ in range(40):
                f = self._H(t) - w
                df = self._dH(t)
                step = np.where(np.abs(df) > 0, f / df, 0)
                step = np.where(np.isfinite(step), step, 0)
                t = t - step
                if np.all(np.abs(step) <= 1e-15 * np.maximum(np.abs(t), 1e-300)):
                    break
        return t

    def _phi(self, xi):
        xi = np.asarray(xi, dtype=complex)
        shape = xi.shape
        t = self.preimage(xi.ravel())
        s = self.rmap.power
        eta_abs2 = np.abs(t) ** (2.0 / s)
        # d xi / d eta = H'(t) s eta^(s - 1) / scale, and |eta|^(s-1) = |t|^((s-1)/s)
        with np.errstate(divide="ignore"):
            log_dxi = (np.log(np.abs(self._dH(t))) + math.log(s)
                       + (s - 1) / s * np.log(np.abs(t)) - math.log(abs(self.scale)))
        return (-np.log1p(eta_abs2) - log_dxi).reshape(shape)


# ------------------------------------------------------------------ quotient potentials


def quotient_potential(m: int):
    """Potential of the pushed-forward Euclidean metric by ``(u, v) = (z^m, w^2)``, up to scale."""

    def P(u, v):
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        h = np.abs(v) + np.abs(u - v)
        root = np.sqrt(np.maximum(h * h - np.abs(u) ** 2, 0.0))
        return (h + root) ** (1.0 / m) + np.maximum(h - root, 0.0) ** (1.0 / m)

    return P


def psi_G2m22(m: int, x1, x2):
    x1 = np.asarray(x1, dtype=complex)
    x2 = np.asarray(x2, dtype=complex)
    return (x1 * x2) ** m, 0.25 * (x1 ** m + x2 ** m) ** 2


@lru_cache(maxsize=None)
def _jacobian_det(m: int):
    u = (X1 * X2) ** m
    v = sympy.Rational(1, 4) * (X1 ** m + X2 ** m) ** 2
    J = sympy.Matrix([[sympy.diff(u, X1), sympy.diff(u, X2)],
                      [sympy.diff(v, X1), sympy.diff(v, X2)]]).det()
    return sympy.lambdify((X1, X2), sympy.factor(J), "numpy")


def m2_potential(u, v, a: float = 8 * math.sqrt(2)):
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return a * np.sqrt(np.abs(u) + np.abs(v) + np.abs(u - v))


@dataclass(frozen=True)
class ConstantRecovery:
    a_values: np.ndarray
    pullback_ratio: np.ndarray
    volume_constant: np.ndarray

    @property
    def a(self) -> float:
        return float(np.mean(self.a_values))

    def max_deviation(self, target: float = 8 * math.sqrt(2)) -> float:
        return float(np.max(np.abs(self.a_values - target)))


def recover_m2_constant(n: int = 200, seed: int = 0x5EED) -> ConstantRecovery:
    """Recover ``a`` in ``r^2 = a (|u| + |v| + |u - v|)^(1/2)`` at random points.

    The pushed-forward potential is ``K (|x1|^2 + |x2|^2)`` with ``K`` fixed by
    requiring the complex Monge-Ampere density in ``(u, v)`` to be
    ``|u|^-1 |v|^-1 |u - v|^-1``: ``K^2 = |det DPsi|^2 / (|u| |v| |u - v|)``.
    The ratio of ``(|u| + |v| + |u - v|)^(1/2)`` to ``|x|^2`` then gives
    ``a = K / ratio``.
    """
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    x2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    u, v = psi_G2m22(2, x1, x2)
    jac = _jacobian_det(2)(x1, x2)
    K = np.abs(jac) / np.sqrt(np.abs(u) * np.abs(v) * np.abs(u - v))
    ratio = np.sqrt(np.abs(u) + np.abs(v) + np.abs(u - v)) / (np.abs(x1) ** 2 + np.abs(x2) ** 2)
    return ConstantRecovery(K / ratio, ratio, K)


def potential_pullback_ratio(m: int, n: int = 200, seed: int = 0x5EED) -> np.ndarray:
    """``P_m(Psi(x)) / |x|^2`` at random points; constant (equal to 1) if the formula is right."""
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    x2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    u, v = psi_G2m22(m, x1, x2)
    return quotient_potential(m)(u, v) / (np.abs(x1) ** 2 + np.abs(x2) ** 2)


def du_val_list() -> list:
    out = [catalog("cyclic", m) for m in (2, 3, 4)]
    out += [catalog("dihedral", m) for m in (2, 3)]
    out += [catalog("duval-t"), catalog("duval-o"), catalog("duval-i")]
    return out
