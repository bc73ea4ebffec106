"""Exact Chern-Weil energy bookkeeping for cone metrics.

Everything here is rational arithmetic with :class:`fractions.Fraction`; the
point of the module is that every balance closes with residual exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import collision_angle, check_troyanov, AdmissibilityError

F = Fraction


def _q(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("energy bookkeeping is exact; pass a Fraction or 'p/q' string")
    return Fraction(x)


def ke_energy(chi_x: int, chi_d: int, beta) -> Fraction:
    """Energy of a Kahler-Einstein metric with cone angle ``2 pi beta`` along ``D``."""
    return chi_x + (_q(beta) - 1) * chi_d


def ale_energy(chi_m: int, group_order: int) -> Fraction:
    """Energy of an ALE space asymptotic to ``C^2 / Gamma``."""
    if group_order < 1:
        raise ValueError("group order must be positive")
    return chi_m - F(1, group_order)


def rf_cone_energy(chi_c: int, beta, nu) -> Fraction:
    """Energy of a Ricci-flat metric bending along ``C``, with link volume ratio ``nu``."""
    nu = _q(nu)
    if not 0 < nu <= 1:
        raise ValueError("volume ratio must lie in (0, 1]")
    return 1 + (_q(beta) - 1) * chi_c - nu


def affine_curve_euler(r: int) -> int:
    """Euler characteristic of a smooth affine curve of degree ``r`` (``r`` points at infinity)."""
    return 2 * r - r * r


def ordinary_point_cone_number(r: int, beta) -> Fraction:
    """Cone number of ``r`` lines through a point, all with angle ``beta``."""
    return 1 - F(r, 2) + r * _q(beta) / 2


def bubble_energy(r: int, beta) -> Fraction:
    """Energy of the bubble that forms when an ``r``-fold point of lines is smoothed."""
    if r < 2:
        raise ValueError("multiplicity must be at least 2")
    beta = _q(beta)
    c = ordinary_point_cone_number(r, beta)
    if c <= 0:
        raise AdmissibilityError(f"r={r}, beta={beta}: nonpositive cone number")
    return rf_cone_energy(affine_curve_euler(r), beta, c * c)


def bubble_admissible(r: int, beta) -> bool:
    """Whether ``r`` equal angles ``beta`` pass the spherical existence test."""
    beta = _q(beta)
    if beta >= 1:
        return False
    return check_troyanov([beta] * r).passed


@dataclass(frozen=True)
class ArrangementSpec:
    """A line arrangement in the projective plane with a common cone angle."""

    name: str
    k: int
    multiplicities: Mapping[int, int]
    beta: Fraction
    expected_energy: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta", _q(self.beta))
        object.__setattr__(self, "multiplicities",
                           {int(r): int(t) for r, t in sorted(self.multiplicities.items())})
        if self.expected_energy is not None:
            object.__setattr__(self, "expected_energy", _q(self.expected_energy))

    def pair_count(self) -> tuple:
        lhs = self.k * (self.k - 1) // 2
        rhs = sum(t * r * (r - 1) // 2 for r, t in self.multiplicities.items())
        return lhs, rhs

    def validate(self) -> None:
        lhs, rhs = self.pair_count()
        if lhs != rhs:
            raise ValueError(f"{self.name}: k(k-1)/2 = {lhs} but intersections give {rhs}")


@dataclass(frozen=True)
class EnergyLedger:
    spec: ArrangementSpec
    total: Fraction
    bubbles: dict = field(default_factory=dict)
    residual: Fraction = Fraction(0)

    @property
    def balanced(self) -> bool:
        return self.residual == 0

    def rows(self) -> list:
        return [(r, self.spec.multiplicities[r], e) for r, e in self.bubbles.items()]


def arrangement_ledger(spec: ArrangementSpec) -> EnergyLedger:
    """Energy of the smoothed curve against the sum of bubbles at multiple points."""
    spec.validate()
    chi_d = 2 - (spec.k - 1) * (spec.k - 2)
    total = ke_energy(3, chi_d, spec.beta)
    bubbles = {r: bubble_energy(r, spec.beta) for r in spec.multiplicities}
    residual = total - sum(t * bubbles[r] for r, t in spec.multiplicities.items())
    return EnergyLedger(spec, total, bubbles, residual)


def _merge(*pairs) -> dict:
    out: dict = {}
    for r, t in pairs:
        out[r] = out.get(r, 0) + t
    return out


def arrangement_a0(m: int) -> ArrangementSpec:
    """Fermat-type arrangement of ``3m`` lines."""
    if m < 2:
        raise ValueError("m >= 2")
    # for m = 3 both buckets are triple points and must be merged
    mult = _merge((3, m * m), (m, 3))
    return ArrangementSpec(f"A0({m})", 3 * m, mult, F(m - 1, m), F(9 * m - 6))


def arrangement_a3(m: int) -> ArrangementSpec:
    """``A0(m)`` plus the three lines joining the coordinate points."""
    if m < 2:
        raise ValueError("m >= 2")
    mult = _merge((2, 3 * m), (3, m * m), (m + 2, 3))
    energy = 3 + F((3 * m + 2) * (3 * m + 1) - 2, m + 1)
    return ArrangementSpec(f"A3({m})", 3 * m + 3, mult, F(m, m + 1), energy)


FIXED_ARRANGEMENTS = {
    "hesse": ArrangementSpec("Hesse", 12, {2: 12, 4: 9}, F(3, 4), F(30)),
    "extended-hesse": ArrangementSpec("extended Hesse", 21, {2: 36, 4: 9, 5: 12}, F(6, 7), F(57)),
    "icosahedral": ArrangementSpec("icosahedral", 15, {2: 15, 3: 10, 5: 6}, F(4, 5), F(39)),
    "g168": ArrangementSpec("G168", 21, {3: 28, 4: 21}, F(6, 7), F(57)),
    "a6": ArrangementSpec("A6", 45, {3: 120, 4: 45, 5: 36}, F(14, 15), F(129)),
}


def arrangement(family: str, m: int | None = None) -> ArrangementSpec:
    key = family.strip().lower().replace("_", "-").replace(" ", "-")
    if key in ("a0", "a-0"):
        if m is None:
            raise ValueError("family A0 needs m")
        return arrangement_a0(m)
    if key in ("a3", "a-3"):
        if m is None:
            raise ValueError("family A3 needs m")
        return arrangement_a3(m)
    if key in ("extendedhesse", "hesse-extended"):
        key = "extended-hesse"
    if key in ("g-168",):
        key = "g168"
    if key not in FIXED_ARRANGEMENTS:
        raise KeyError(f"unknown arrangement family {family!r}")
    return FIXED_ARRANGEMENTS[key]


def all_arrangements(m_range=range(2, 21)) -> list:
    specs = [arrangement_a0(m) for m in m_range]
    specs += [arrangement_a3(m) for m in m_range]
    specs += list(FIXED_ARRANGEMENTS.values())
    return specs


@dataclass(frozen=True)
class BishopGromovReport:
    passed: bool
    nu: Fraction
    bound: Fraction
    equality: bool


def bishop_gromov_check(beta, nu, c1_x: int = 3, c1_l: int = 1) -> BishopGromovReport:
    """Volume-ratio lower bound for a KE metric on the plane bent along a curve of degree ``c1_l``.

    Degrees are measured against the hyperplane class, whose square is 1.
    """
    beta, nu = _q(beta), _q(nu)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    if not 0 < nu <= 1:
        raise ValueError("volume ratio must lie in (0, 1]")
    bound = (c1_x - (1 - beta) * c1_l) ** 2 / 9
    return BishopGromovReport(nu >= bound, nu, bound, nu == bound)


def cuspidal_cubic_bishop_gromov(beta) -> BishopGromovReport:
    """Bound at the cusp of a cubic: the tangent cone is ``C x C_gamma`` with ``gamma = 2 beta - 1``."""
    beta = _q(beta)
    gamma = collision_angle(2, beta)
    return bishop_gromov_check(beta, gamma, c1_x=3, c1_l=3)


@dataclass(frozen=True)
class Bookkeeping:
    smooth: Fraction
    limit: Fraction
    bubble: Fraction
    bubble_count: int

    @property
    def lost(self) -> Fraction:
        return self.smooth - self.limit

    @property
    def balanced(self) -> bool:
        return self.lost == self.bubble_count * self.bubble


def elliptic_bookkeeping(beta) -> Bookkeeping:
    """Smooth cubics degenerating to a triangle of lines: three bubbles at the nodes."""
    beta = _q(beta)
    smooth = ke_energy(3, 0, beta)
    limit = 3 * beta * beta
    bubble = rf_cone_energy(0, beta, beta * beta)
    return Bookkeeping(smooth, limit, bubble, 3)


def quartic_bookkeeping(beta) -> Bookkeeping:
    """Smooth quartics degenerating to a double conic: eight bubbles at the branch points."""
    beta = _q(beta)
    gamma = collision_angle(2, beta)
    smooth = ke_energy(3, -4, beta)
    limit = ke_energy(3, 2, gamma)
    bubble = rf_cone_energy(1, beta, gamma)
    return Bookkeeping(smooth, limit, bubble, 8)
