"""Plane-curve germs at the origin: order, Newton polygon, singularity exponent.

Polynomials are dictionaries ``{(i, j): Fraction}`` for monomials
``z**i * w**j``.  The analysis covers smooth germs, ordinary multiple points,
and germs with a single tangent line whose Newton polygon is one
non-degenerate edge meeting both axes.  Anything else is rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple

import sympy

from .core import collision_angle, AdmissibilityError

Poly2 = Dict[Tuple[int, int], Fraction]


class PolynomialSyntaxError(ValueError):
    pass


class UnsupportedGerm(ValueError):
    """The germ is outside the families the analyzer handles."""


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([zw])|(\^)|([-+*()]))")


def _tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 8]!r}")
        num, var, caret, op = m.groups()
        if num is not None:
            out.append(("num", Fraction(num)))
        elif var is not None:
            out.append(("var", var))
        elif caret is not None:
            out.append(("op", "^"))
        else:
            out.append(("op", op))
        pos = m.end()
    return out


def _add(a: Poly2, b: Poly2, sign: int = 1) -> Poly2:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + sign * v
        if out[k] == 0:
            del out[k]
    return out


def _mul(a: Poly2, b: Poly2) -> Poly2:
    out: Poly2 = {}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, Fraction(0)) + v1 * v2
    return {k: v for k, v in out.items() if v != 0}


def _pow(a: Poly2, n: int) -> Poly2:
    out: Poly2 = {(0, 0): Fraction(1)}
    for _ in range(n):
        out = _mul(out, a)
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> Poly2:
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        acc = _add({}, self.term(), sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            acc = _add(acc, self.term(), 1 if op == "+" else -1)
        return acc

    def term(self) -> Poly2:
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = _mul(acc, self.factor())
        return acc

    def factor(self) -> Poly2:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or val.denominator != 1:
                raise PolynomialSyntaxError("exponent must be a non-negative integer")
            return _pow(base, int(val))
        return base

    def atom(self) -> Poly2:
        kind, val = self.take()
        if kind == "num":
            return {(0, 0): val} if val != 0 else {}
        if kind == "var":
            return {(1, 0): Fraction(1)} if val == "z" else {(0, 1): Fraction(1)}
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise PolynomialSyntaxError("missing ')'")
            return inner
        raise PolynomialSyntaxError(f"unexpected token {val!r}")


def parse_polynomial(text: str) -> Poly2:
    """Parse an expression in ``z`` and ``w`` (see docs/grammar.md)."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolynomialSyntaxError("empty polynomial")
    parser = _Parser(tokens)
    poly = parser.expr()
    if parser.i != len(tokens):
        raise PolynomialSyntaxError(f"trailing input after token {parser.i}")
    return poly


def format_polynomial(poly: Poly2) -> str:
    if not poly:
        return "0"
    parts = []
    for (i, j), v in sorted(poly.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0])):
        mono = "*".join(s for s in (
            "z" if i == 1 else f"z^{i}" if i else "",
            "w" if j == 1 else f"w^{j}" if j else "") if s)
        coef = abs(v)
        body = mono if (coef == 1 and mono) else (f"{coef}*{mono}" if mono else f"{coef}")
        parts.append(("-" if v < 0 else "+", body))
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {b}" for s, b in parts[1:])


# ---------------------------------------------------------------- analysis

_Z, _W = sympy.symbols("z w")


def _to_sympy(poly: Poly2):
    return sum((sympy.Rational(v.numerator, v.denominator) * _Z ** i * _W ** j
                for (i, j), v in poly.items()), sympy.Integer(0))


def _from_sympy(expr) -> Poly2:
    p = sympy.Poly(sympy.expand(expr), _Z, _W)
    out: Poly2 = {}
    for (i, j), c in p.terms():
        c = sympy.Rational(c)
        out[(int(i), int(j))] = Fraction(int(c.p), int(c.q))
    return out


def newton_polygon(poly: Poly2) -> list:
    """Lower-left convex hull of the support, from the ``w`` axis to the ``z`` axis."""
    pts = sorted(poly)
    # monotone chain over points sorted by z exponent, keeping the lower hull
    hull: list = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    # keep the part with strictly decreasing w exponent
    out = [hull[0]]
    for p in hull[1:]:
        if p[1] < out[-1][1]:
            out.append(p)
    return out


@dataclass(frozen=True)
class CurveGerm:
    poly: Poly2
    order: int
    family: str
    c0: Fraction
    puiseux_ratio: Fraction | None = None
    e: int | None = None
    normal_form: Poly2 = field(default_factory=dict)
    polygon: tuple = ()

    def admissible_range(self) -> tuple:
        return admissible_angle_range(self)


def _order(poly: Poly2) -> int:
    return min(i + j for i, j in poly)


def _normalize_tangent(poly: Poly2, tangent: sympy.Expr) -> Poly2:
    """Change coordinates so the tangent line becomes ``w = 0``."""
    a = sympy.Poly(tangent, _Z, _W).coeff_monomial(_Z)
    b = sympy.Poly(tangent, _Z, _W).coeff_monomial(_W)
    expr = _to_sympy(poly)
    if a == 0:
        return poly
    if b == 0:
        return _from_sympy(expr.subs({_Z: _W, _W: _Z}, simultaneous=True))
    # new w is the tangent form a z + b w
    return _from_sympy(expr.subs(_W, (_W - a * _Z) / b))


def analyze_germ(poly) -> CurveGerm:
    """Order, first Puiseux ratio and singularity exponent ``1/d + 1/e`` of a germ."""
    if isinstance(poly, str):
        poly = parse_polynomial(poly)
    poly = {k: Fraction(v) for k, v in poly.items() if v != 0}
    if not poly:
        raise UnsupportedGerm("zero polynomial")
    d = _order(poly)
    if d == 0:
        raise UnsupportedGerm("polynomial does not vanish at the origin")
    if d == 1:
        return CurveGerm(poly, 1, "smooth", Fraction(1), normal_form=poly)

    lowest = {k: v for k, v in poly.items() if k[0] + k[1] == d}
    form = sympy.Poly(_to_sympy(lowest), _Z, _W)
    # distinct linear factors over Q; a reduced tangent cone splits over C into d lines
    sqf = sympy.sqf_part(form.as_expr())
    sqf_deg = sympy.Poly(sqf, _Z, _W).total_degree()
    if sqf_deg == d:
        return CurveGerm(poly, d, "ordinary", Fraction(2, d), normal_form=poly)
    if sqf_deg != 1:
        raise UnsupportedGerm(
            f"tangent cone {sympy.factor(form.as_expr())} has {sqf_deg} distinct lines "
            "with multiplicity; only ordinary points and single-tangent germs are supported")

    normal = _normalize_tangent(poly, sqf)
    hull = newton_polygon(normal)
    if hull[0][0] != 0 or hull[-1][1] != 0:
        raise UnsupportedGerm("Newton polygon does not meet both axes (non-isolated or not convenient)")
    if len(hull) != 2:
        raise UnsupportedGerm(f"Newton polygon has {len(hull) - 1} compact edges; only one is supported")
    (_, m), (n, _) = hull
    if m != d:
        raise UnsupportedGerm("normalization failed to place the tangent along w = 0")
    _check_nondegenerate(normal, m, n)
    return CurveGerm(poly, d, "newton-edge", Fraction(1, m) + Fraction(1, n),
                     Fraction(n, m), n, normal, tuple(hull))


def _check_nondegenerate(poly: Poly2, m: int, n: int) -> None:
    """The edge polynomial must have distinct roots in ``w^(m/g) / z^(n/g)``."""
    g = math.gcd(m, n)
    edge = {k: v for k, v in poly.items() if k[0] * m + k[1] * n == m * n}
    s = sympy.Symbol("s")
    # monomials on the edge are z^(n/g * (g-k)) w^(m/g * k)
    coeffs = {}
    for (i, j), v in edge.items():
        coeffs[j // (m // g)] = sympy.Rational(v.numerator, v.denominator)
    q = sum((c * s ** k for k, c in coeffs.items()), sympy.Integer(0))
    if sympy.degree(sympy.gcd(q, sympy.diff(q, s)), s) > 0:
        raise UnsupportedGerm("edge polynomial has repeated roots (degenerate Newton edge)")


def admissible_angle_range(germ: CurveGerm) -> tuple:
    """Open interval of angles with a locally integrable volume form along the curve."""
    return (1 - germ.c0, Fraction(1))


def flat_cone_angle_window(m: int, n: int) -> tuple:
    """Angles along ``w^m = z^n`` realized by a flat cone metric pulled back from a triangle."""
    if not 2 <= m < n:
        raise ValueError("need 2 <= m < n")
    if math.gcd(m, n) != 1:
        raise ValueError("m and n must be co-prime")
    return (1 - Fraction(1, m) - Fraction(1, n), 1 - Fraction(1, m) + Fraction(1, n))


@dataclass(frozen=True)
class RescalingVerdict:
    gamma: object
    exponent: object
    verdict: str  # "product", "non-product" or "boundary"


def rescaling_exponent(m: int, n: int, beta) -> RescalingVerdict:
    """Power of ``lambda`` in front of ``z^n`` after the parabolic rescaling of ``w^m = z^n``.

    The rescaling is ``(z, w) -> (lambda z, lambda^(1/gamma) w)`` with ``gamma``
    the angle left after ``m`` sheets collide.
    """
    if not 2 <= m < n:
        raise ValueError("need 2 <= m < n")
    if isinstance(beta, str):
        beta = Fraction(beta)
    if not 0 < beta < 1:
        raise AdmissibilityError("beta must lie in (0, 1)")
    gamma = collision_angle(m, beta)
    exponent = n - m / gamma if not isinstance(gamma, Fraction) else n - Fraction(m) / gamma
    if exponent > 0:
        verdict = "product"
    elif exponent < 0:
        verdict = "non-product"
    else:
        verdict = "boundary"
    return RescalingVerdict(gamma, exponent, verdict)


def product_threshold(m: int, n: int) -> Fraction:
    return 1 - Fraction(1, m) + Fraction(1, n)


def ordinary_point(d: int, slopes=None) -> Poly2:
    """``prod (z - a_j w)`` for ``d`` distinct integer slopes (default ``0..d-1``)."""
    slopes = list(range(d)) if slopes is None else list(slopes)
    poly: Poly2 = {(0, 0): Fraction(1)}
    for a in slopes:
        poly = _mul(poly, {(1, 0): Fraction(1), (0, 1): -Fraction(a)})
    return poly


def brieskorn(m: int, n: int) -> Poly2:
    """``w^m - z^n``."""
    return {(0, m): Fraction(1), (n, 0): Fraction(-1)}
