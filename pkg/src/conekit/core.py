"""Cone-angle configurations, admissibility tests and exact arithmetic helpers.

Angles are handled either as :class:`fractions.Fraction` (exact) or as
floats.  Exact inputs are compared exactly; float inputs are compared with a
tolerance and a boundary hit counts as a failure, because every admissibility
inequality here is strict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence, Union

Number = Union[Fraction, float, int]

INF = "inf"
DEFAULT_FLOAT_TOL = 1e-12


class AdmissibilityError(ValueError):
    """Raised when angle data is outside the domain of an operation."""


def parse_number(value) -> Number:
    """Parse ``"p/q"`` strings and integers as exact fractions, floats as floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not angles")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            return float(text)
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a number")


def is_exact(x) -> bool:
    return isinstance(x, (_RationalABC, Fraction)) and not isinstance(x, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def format_number(x) -> Union[str, float]:
    """Render exact values as ``"p/q"`` and floats with 17 significant digits."""
    if is_exact(x):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(f"{float(x):.17g}")


def _positive(x, tol: float) -> bool:
    """Strict ``x > 0``; floats must clear the tolerance."""
    if is_exact(x):
        return x > 0
    return x > tol


@dataclass(frozen=True)
class SlackReport:
    """Outcome of an admissibility test with the margins of each inequality."""

    passed: bool
    slacks: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _check_angle_list(angles: Sequence, allow_one: int = 0) -> list:
    if len(angles) < 2:
        raise AdmissibilityError("need at least two cone angles")
    out = [parse_number(b) if isinstance(b, str) else b for b in angles]
    ones = 0
    for b in out:
        if b <= 0 or b > 1:
            raise AdmissibilityError(f"cone angle {b} outside (0, 1]")
        if b == 1:
            ones += 1
    if ones > allow_one:
        if allow_one == 0:
            raise AdmissibilityError("cone angles must lie in (0, 1)")
        raise AdmissibilityError(f"at most {allow_one} angles may equal 1")
    return out


def check_troyanov(angles: Sequence, *, seifert_axes: bool = False,
                   tol: float = DEFAULT_FLOAT_TOL) -> SlackReport:
    """Existence test for a spherical metric with the given cone angles.

    For ``d >= 3`` the test is ``0 < 2 - d + sum(b) < 2 min(b)``; for two
    points the angles must coincide.  With ``seifert_axes`` up to two angles
    may equal 1 (the axis slots of a Seifert configuration).
    """
    bs = _check_angle_list(angles, allow_one=2 if seifert_axes else 0)
    d = len(bs)
    if d == 2:
        diff = bs[0] - bs[1]
        equal = diff == 0 if all_exact(bs) else abs(diff) <= tol
        return SlackReport(equal, {"difference": diff},
                           "" if equal else "two cone points need equal angles")
    excess = 2 - d + sum(bs)
    lower = excess
    upper = 2 * min(bs) - excess
    ok = _positive(lower, tol) and _positive(upper, tol)
    reason = ""
    if not _positive(lower, tol):
        reason = "2 - d + sum(beta) is not positive"
    elif not _positive(upper, tol):
        reason = "2 - d + sum(beta) is not below 2 min(beta)"
    return SlackReport(ok, {"lower": lower, "upper": upper}, reason)


def cone_number(angles: Sequence) -> Number:
    """``1 - d/2 + sum(beta)/2``, exact for rational input."""
    bs = [parse_number(b) if isinstance(b, str) else b for b in angles]
    d = len(bs)
    if all_exact(bs):
        return 1 - Fraction(d, 2) + sum(bs, Fraction(0)) / 2
    return 1.0 - d / 2.0 + float(sum(bs)) / 2.0


@dataclass(frozen=True)
class TriangleReport:
    passed: bool
    area: Number | None
    slacks: dict

    def __bool__(self) -> bool:
        return self.passed


def check_spherical_triangle(b1, b2, b3, *, tol: float = DEFAULT_FLOAT_TOL) -> TriangleReport:
    """Whether a spherical triangle with angles ``pi*b_i`` exists; area if so."""
    bs = _check_angle_list([b1, b2, b3])
    total = sum(bs)
    slacks = {"sum": total - 1}
    ok = _positive(total - 1, tol)
    for i in range(3):
        others = sum(1 - bs[j] for j in range(3) if j != i)
        s = others - (1 - bs[i])
        slacks[f"polar_{i}"] = s
        ok = ok and _positive(s, tol)
    area = None
    if ok:
        area = math.pi * float(total - 1)
    return TriangleReport(ok, area, slacks)


def collision_angle(k: int, beta: Number) -> Number:
    """Angle left after ``k`` cone points of angle ``beta`` merge."""
    if k < 1:
        raise AdmissibilityError("k must be a positive integer")
    if isinstance(beta, str):
        beta = parse_number(beta)
    gamma = k * beta + 1 - k
    if gamma <= 0:
        raise AdmissibilityError(f"beta={beta} too small for a {k}-fold collision")
    return gamma


@dataclass(frozen=True)
class ConeConfig:
    """Marked points on the projective line with cone angles.

    Points are complex numbers in the affine chart or the symbol ``"inf"``.
    """

    points: tuple
    angles: tuple
    seifert_axes: bool = False

    def __post_init__(self):
        pts = tuple(INF if _is_inf(p) else complex(p) for p in self.points)
        angs = tuple(parse_number(b) if isinstance(b, str) else b for b in self.angles)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "angles", angs)
        if len(pts) != len(angs):
            raise AdmissibilityError("points and angles differ in length")
        _check_angle_list(angs, allow_one=2 if self.seifert_axes else 0)
        seen = []
        for p in pts:
            for q in seen:
                if p == q or (p != INF and q != INF and abs(p - q) < 1e-14):
                    raise AdmissibilityError(f"repeated marked point {p}")
            seen.append(p)
        if sum(p == INF for p in pts) > 1:
            raise AdmissibilityError("at most one point at infinity")

    @property
    def d(self) -> int:
        return len(self.points)

    @property
    def c(self) -> Number:
        return cone_number(self.angles)

    def troyanov(self, tol: float = DEFAULT_FLOAT_TOL) -> SlackReport:
        return check_troyanov(self.angles, seifert_axes=self.seifert_axes, tol=tol)

    def float_angles(self) -> list:
        return [float(b) for b in self.angles]

    def finite(self) -> list:
        """(point, angle) pairs for the finite marked points."""
        return [(p, b) for p, b in zip(self.points, self.angles) if p != INF]

    def angle_at_infinity(self):
        for p, b in zip(self.points, self.angles):
            if p == INF:
                return b
        return None

    def normalized(self) -> "ConeConfig":
        """Move the last three points to 0, 1, inf (the last two to 0, inf when d = 2)."""
        if self.d == 2:
            mob = _mobius_two(self.points[0], self.points[1])
        else:
            mob = _mobius_three(*self.points[-3:])
        pts = tuple(_apply_mobius(mob, p) for p in self.points)
        return ConeConfig(pts, self.angles, self.seifert_axes)

    def to_json(self) -> dict:
        pts = [INF if p == INF else [p.real, p.imag] for p in self.points]
        return {"points": pts, "angles": [format_number(b) for b in self.angles]}

    @classmethod
    def from_json(cls, data) -> "ConeConfig":
        if isinstance(data, str):
            data = json.loads(data)
        pts = []
        for p in data["points"]:
            if _is_inf(p):
                pts.append(INF)
            elif isinstance(p, (list, tuple)):
                pts.append(complex(float(p[0]), float(p[1])))
            else:
                pts.append(complex(p))
        angs = [parse_number(b) for b in data["angles"]]
        return cls(tuple(pts), tuple(angs), bool(data.get("seifert_axes", False)))


def _is_inf(p) -> bool:
    return isinstance(p, str) and p.strip().lower() in ("inf", "infinity", "∞")


def _apply_mobius(m, p):
    a, b, c, d = m
    if p == INF:
        return INF if c == 0 else a / c
    den = c * p + d
    if abs(den) < 1e-300:
        return INF
    return (a * p + b) / den


def _mobius_two(p, q):
    """Map p -> 0 and q -> inf."""
    if p == INF:
        # z -> 1/(z - q)
        return (0, 1, 1, -q)
    if q == INF:
        return (1, -p, 0, 1)
    return (1, -p, 1, -q)


def _mobius_three(p, q, r):
    """Unique Moebius map sending (p, q, r) to (0, 1, inf)."""
    if p == INF:
        return (0, q - r, 1, -r)
    if q == INF:
        return (1, -p, 1, -r)
    if r == INF:
        return (1, -p, 0, q - p)
    return (q - r, -p * (q - r), q - p, -r * (q - p))
