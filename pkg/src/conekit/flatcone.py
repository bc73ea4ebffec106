"""Flat Kähler cone metrics on C^2 built from curvature-4 spherical metrics.

With ``xi = z / w`` the Kähler potential is

    r^2 = (1/c) |w|^(2c) exp(-u(xi)),

where ``u`` is the regular part of the base log-factor.  For ``|xi| > 1`` the
same potential is evaluated from the ``eta = w / z`` chart,

    r^2 = (K/c) |z|^(2c) exp(-u_eta(eta)),    K = prod_{a != 0 finite} |a|^(beta_a - 1),

which is the identical function rewritten (the constant ``K`` comes from the
change of regular part between charts).  The Monge-Ampère density
``det(d dbar r^2)`` equals ``prod |l_j|^(2 beta_j - 2)`` with ``l_j = z - a_j w``
for finite marked points and ``l = w`` for the point at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate as sci_integrate

from .core import INF, AdmissibilityError, ConeConfig, cone_number
from .spherical import ConformalMetric


@dataclass(frozen=True)
class Line:
    """Linear form ``z - slope * w``, or ``w`` when the slope is infinite."""

    slope: object
    beta: float

    def __call__(self, z, w):
        if self.slope == INF:
            return np.asarray(w, dtype=complex)
        return np.asarray(z, dtype=complex) - self.slope * np.asarray(w, dtype=complex)

    @property
    def norm(self) -> float:
        return 1.0 if self.slope == INF else math.hypot(1.0, abs(self.slope))


def lines_from_config(config: ConeConfig) -> list:
    return [Line(p, float(b)) for p, b in zip(config.points, config.angles)]


class FlatConeMetric:
    """Kähler potential of a flat cone on C^2, optionally pulled back by ``(z, w) -> (z^q, w^p)``."""

    def __init__(self, base: ConformalMetric, lines=None, p: int = 1, q: int = 1):
        if abs(base.kappa - 4.0) > 1e-12:
            raise ValueError("the flat cone is built from a curvature-4 base")
        cfg = base.config
        expected = lines_from_config(cfg)
        if lines is not None:
            given = sorted((_slope_key(l.slope), l.beta) for l in lines)
            want = sorted((_slope_key(l.slope), l.beta) for l in expected)
            if len(given) != len(want) or any(
                    abs(a[0] - b[0]) > 1e-12 or abs(a[1] - b[1]) > 1e-12
                    for a, b in zip(given, want)):
                raise AdmissibilityError("line slopes and angles do not match the base punctures")
        self.base = base
        self.lines = expected
        self.p, self.q = int(p), int(q)
        self.c = cfg.c
        self._cf = float(self.c)
        self._xi_marks = base.punctures_in_chart("xi")
        self._eta_marks = base.punctures_in_chart("eta")
        self._K = math.exp(sum((b - 1) * math.log(abs(a)) for a, b in self._xi_marks if abs(a) > 0))

    # ---- potential
    @property
    def weight(self):
        """Scaling exponent: ``r^2(m(lambda)) = lambda^(2 weight) r^2``."""
        return self.p * self.q * self.c

    def _u(self, zeta, chart: str, evaluator=None) -> np.ndarray:
        phi = evaluator(zeta) if evaluator is not None else self.base.log_factor(zeta, chart)
        for a, b in (self._xi_marks if chart == "xi" else self._eta_marks):
            phi = phi - (b - 1) * np.log(np.abs(zeta - a))
        return phi

    def _downstairs(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if self.p == 1 and self.q == 1:
            return z, w
        return z ** self.q, w ** self.p

    def _potential_chart(self, z, w, chart: str, evaluator=None) -> np.ndarray:
        c = self._cf
        if chart == "xi":
            return np.abs(w) ** (2 * c) * np.exp(-self._u(z / w, "xi", evaluator)) / c
        return self._K * np.abs(z) ** (2 * c) * np.exp(-self._u(w / z, "eta", evaluator)) / c

    def potential(self, z, w) -> np.ndarray:
        """``r^2`` at ``(z, w)``; zero at the origin."""
        Z, W = self._downstairs(z, w)
        Z, W = np.broadcast_arrays(np.atleast_1d(Z), np.atleast_1d(W))
        out = np.zeros(Z.shape)
        near = np.abs(Z) <= np.abs(W)
        far = ~near & (np.abs(Z) > 0)
        near &= np.abs(W) > 0
        if near.any():
            out[near] = self._potential_chart(Z[near], W[near], "xi")
        if far.any():
            out[far] = self._potential_chart(Z[far], W[far], "eta")
        return out

    def local_potential(self, z0: complex, w0: complex):
        """Potential evaluated with one fixed chart and base evaluator, for stencils around ``(z0, w0)``."""
        Z0, W0 = self._downstairs(z0, w0)
        chart = "xi" if abs(Z0) <= abs(W0) else "eta"
        zeta0 = complex(Z0 / W0) if chart == "xi" else complex(W0 / Z0)
        ev = self.base.local_evaluator(zeta0, chart)

        def f(z, w):
            Z, W = self._downstairs(z, w)
            return self._potential_chart(np.atleast_1d(Z), np.atleast_1d(W), chart, ev)

        return f

    # ---- predicted quantities
    def predicted_density(self, z, w) -> np.ndarray:
        """``prod |l_j|^(2 beta_j - 2)``, times ``(p q)^2`` and pulled back for a Seifert cone."""
        Z, W = self._downstairs(z, w)
        out = np.ones(np.broadcast(np.atleast_1d(Z), np.atleast_1d(W)).shape)
        for line in self.lines:
            out = out * np.abs(line(Z, W)) ** (2 * line.beta - 2)
        if (self.p, self.q) != (1, 1):
            # Jacobian of (z, w) -> (z^q, w^p)
            z = np.asarray(z, dtype=complex)
            w = np.asarray(w, dtype=complex)
            out = out * (self.p * self.q) ** 2 * np.abs(z) ** (2 * self.q - 2) * np.abs(w) ** (2 * self.p - 2)
        return out

    def distance_to_singular_locus(self, z: complex, w: complex) -> float:
        """Euclidean distance to the nearest line, or a lower bound for the pulled-back curves."""
        if (self.p, self.q) == (1, 1):
            return min(abs(complex(l(z, w))) / l.norm for l in self.lines)
        Z, W = self._downstairs(z, w)
        # |grad (z^q - a w^p)| bounds the distance from below to first order
        dists = [abs(z), abs(w)]
        for l in self.lines:
            if l.slope in (INF,) or abs(l.slope) == 0:
                continue
            g = math.hypot(self.q * abs(z) ** (self.q - 1), self.p * abs(l.slope) * abs(w) ** (self.p - 1))
            dists.append(abs(complex(l(Z, W))) / max(g, 1e-300))
        return min(dists)

    def seifert_axes(self) -> tuple:
        """Angles along ``{z = 0}`` and ``{w = 0}`` after the pullback."""
        cfg = self.base.config
        b0 = next((b for p, b in zip(cfg.points, cfg.angles) if p != INF and abs(p) == 0), 1)
        binf = cfg.angle_at_infinity() or 1
        return (self.q * b0, self.p * binf)

    def describe(self) -> dict:
        return {
            "config": self.base.config.to_json(),
            "p": self.p,
            "q": self.q,
            "weight": str(self.weight) if isinstance(self.weight, Fraction) else self.weight,
            "lines": [{"slope": "inf" if l.slope == INF else [l.slope.real, l.slope.imag],
                       "beta": l.beta} for l in self.lines],
        }


def _slope_key(s) -> float:
    return math.inf if s == INF else complex(s).real * 1e6 + complex(s).imag


def build_flat_cone(base: ConformalMetric, lines=None) -> FlatConeMetric:
    return FlatConeMetric(base, lines)


def product_potential(beta: float, z, w) -> np.ndarray:
    """``beta^-2 (|z|^(2 beta) + |w|^(2 beta))``, the potential of ``C_beta x C_beta``."""
    return (np.abs(z) ** (2 * beta) + np.abs(w) ** (2 * beta)) / beta ** 2


# ------------------------------------------------------------------ finite differences


def _real_hessian(f, x0: np.ndarray, h: float) -> np.ndarray:
    """Second-order central-difference Hessian of ``f: R^4 -> R``."""
    n = len(x0)
    E = np.eye(n) * h
    f0 = f(x0)
    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = (f(x0 + E[i]) - 2 * f0 + f(x0 - E[i])) / h ** 2
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = (f(x0 + E[i] + E[j]) - f(x0 + E[i] - E[j])
                                 - f(x0 - E[i] + E[j]) + f(x0 - E[i] - E[j])) / (4 * h ** 2)
    return H


def complex_hessian_fd(f, z0: complex, w0: complex, step: float = 1e-3,
                       richardson: bool = False) -> np.ndarray:
    """``[d_i dbar_j f]`` from the real Hessian in coordinates ``(x1, y1, x2, y2)``."""

    def g(x):
        return float(f(complex(x[0], x[1]), complex(x[2], x[3]))[0])

    x0 = np.array([z0.real, z0.imag, w0.real, w0.imag])
    H = _real_hessian(g, x0, step)
    if richardson:
        H = (4 * _real_hessian(g, x0, step / 2) - H) / 3
    M = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            xi, yi, xj, yj = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
            M[i, j] = 0.25 * ((H[xi, xj] + H[yi, yj]) + 1j * (H[xi, yj] - H[yi, xj]))
    return M


def volume_density_fd(metric: FlatConeMetric, point, step: float = 1e-3,
                      richardson: bool = False) -> float:
    """``det(d dbar r^2)`` at ``point = (z, w)`` by finite differences."""
    z0, w0 = complex(point[0]), complex(point[1])
    scale = math.hypot(abs(z0), abs(w0))
    h = step * scale
    if scale == 0 or metric.distance_to_singular_locus(z0, w0) <= 10 * h:
        raise AdmissibilityError("point too close to the singular locus")
    M = complex_hessian_fd(metric.local_potential(z0, w0), z0, w0, h, richardson)
    return float(np.linalg.det(M).real)


@dataclass
class VolumeCheck:
    points: np.ndarray
    measured: np.ndarray
    predicted: np.ndarray

    @property
    def relative_errors(self) -> np.ndarray:
        return np.abs(self.measured / self.predicted - 1)

    @property
    def max_relative_error(self) -> float:
        return float(self.relative_errors.max())

    def rows(self) -> list:
        return [(complex(z), complex(w), float(m), float(p), float(e))
                for (z, w), m, p, e in zip(self.points, self.measured, self.predicted,
                                           self.relative_errors)]


def sample_points(metric: FlatConeMetric, n: int, rng: np.random.Generator,
                  min_distance: float = 0.1) -> np.ndarray:
    """Points on the unit sphere of C^2 at distance at least ``min_distance`` from the singular locus."""
    out = []
    while len(out) < n:
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        z, w = complex(v[0], v[1]), complex(v[2], v[3])
        if metric.distance_to_singular_locus(z, w) >= min_distance:
            out.append((z, w))
    return np.array(out)


def volume_check(metric: FlatConeMetric, n: int = 50, seed: int = 0x5EED,
                 step: float = 1e-3, richardson: bool = False) -> VolumeCheck:
    pts = sample_points(metric, n, np.random.default_rng(seed))
    measured = np.array([volume_density_fd(metric, pt, step, richardson) for pt in pts])
    predicted = np.array([metric.predicted_density(z, w)[0] for z, w in pts])
    return VolumeCheck(pts, measured, predicted)


def scaling_check(metric: FlatConeMetric, lam: float, samples) -> float:
    """Max of ``|r^2(m_lambda x) / (lambda^(2 weight) r^2(x)) - 1|``."""
    pts = np.asarray(samples, dtype=complex)
    z, w = pts[:, 0], pts[:, 1]
    base = metric.potential(z, w)
    scaled = metric.potential(lam ** metric.p * z, lam ** metric.q * w)
    return float(np.max(np.abs(scaled / (lam ** (2 * float(metric.weight)) * base) - 1)))


def kahler_closedness_fd(metric: FlatConeMetric, point, step: float = 1e-3,
                         outer: float | None = None) -> float:
    """Relative asymmetry ``|d_k g_ij - d_i g_kj|`` of FD metric coefficients.

    ``g`` is the FD complex Hessian of the potential; its holomorphic
    derivatives come from a second layer of central differences with step
    ``outer``.  A Kähler form makes the residual vanish up to the FD error.
    """
    z0, w0 = complex(point[0]), complex(point[1])
    scale = math.hypot(abs(z0), abs(w0))
    h = step * scale
    H = (outer or 10 * step) * scale
    f = metric.local_potential(z0, w0)

    def g(z, w):
        return complex_hessian_fd(f, z, w, h)

    base = np.array([z0, w0])
    dg = []
    for k in range(2):
        e = np.zeros(2, dtype=complex)
        e[k] = H
        dx = (g(*(base + e)) - g(*(base - e))) / (2 * H)
        dy = (g(*(base + 1j * e)) - g(*(base - 1j * e))) / (2 * H)
        dg.append(0.5 * (dx - 1j * dy))
    # d_0 g_{1 j} versus d_1 g_{0 j}
    resid = max(abs(dg[0][1, j] - dg[1][0, j]) for j in range(2))
    size = max(np.abs(dg[0]).max(), np.abs(dg[1]).max())
    return float(resid / size)


def line_cone_angle(metric: FlatConeMetric, slope: complex, step: float = 1e-3) -> float:
    """Total angle over ``2 pi`` of the restriction to the complex line ``z = slope * w``.

    Along ``t -> (slope t, t)`` the induced metric is ``rho(|t|) |dt|^2``;
    the angle is the circumference of ``|t| = 1`` divided by ``2 pi`` times
    the radial distance from the origin.
    """
    def density(t):
        f = metric.local_potential(complex(slope * t), complex(t))
        g = lambda x: float(f(slope * complex(x[0], x[1]), complex(x[0], x[1]))[0])
        H = _real_hessian(g, np.array([t.real, t.imag]), step * abs(t))
        return 0.25 * (H[0, 0] + H[1, 1])

    circ = sci_integrate.quad(lambda th: math.sqrt(density(complex(math.cos(th), math.sin(th)))),
                              0, 2 * math.pi, limit=200)[0]
    c = float(metric.weight)
    # rho ~ tau^(1/c - 1) near 0: integrate in tau = |t|^c, dt = (1/c) tau^(1/c - 1) dtau
    radial = sci_integrate.quad(
        lambda tau: math.sqrt(density(complex(tau ** (1 / c), 0))) * tau ** (1 / c - 1) / c,
        1e-12, 1, limit=200)[0]
    return circ / (2 * math.pi * radial)


def seifert_flat_pullback(metric: FlatConeMetric, p: int, q: int) -> FlatConeMetric:
    """``r~^2(z, w) = r^2(z^q, w^p)``; the axes carry angles ``q beta_0`` and ``p beta_inf``."""
    if (metric.p, metric.q) != (1, 1):
        raise ValueError("pull back an unpulled flat cone")
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise AdmissibilityError("need coprime positive p, q")
    out = FlatConeMetric(metric.base, None, p, q)
    axes = out.seifert_axes()
    if any(a > 1 for a in axes):
        raise AdmissibilityError(f"pulled-back axis angles {axes} exceed 1")
    return out


def seifert_weight(config: ConeConfig, p: int, q: int):
    """``pq (1 - d/2 + sum_j beta_j/2 + beta_z/(2q) + beta_w/(2p))`` with upstairs axis angles.

    Here the sum runs over marked points other than 0 and infinity, and
    ``beta_z = q beta_0``, ``beta_w = p beta_inf`` are the pulled-back axis
    angles.  This agrees with ``pq * c`` of the base.
    """
    others, b0, binf = [], None, None
    for pt, b in zip(config.points, config.angles):
        if pt == INF:
            binf = b
        elif abs(pt) == 0:
            b0 = b
        else:
            others.append(b)
    if b0 is None or binf is None:
        raise AdmissibilityError("need marked points at 0 and infinity")
    bz, bw = q * Fraction(b0), p * Fraction(binf)
    d = len(others) + 2
    return p * q * (1 - Fraction(d, 2) + sum(map(Fraction, others), Fraction(0)) / 2
                    + bz / (2 * q) + bw / (2 * p))


__all__ = [
    "Line", "FlatConeMetric", "build_flat_cone", "product_potential", "complex_hessian_fd",
    "volume_density_fd", "VolumeCheck", "volume_check", "sample_points", "scaling_check",
    "kahler_closedness_fd", "line_cone_angle", "seifert_flat_pullback", "seifert_weight",
    "lines_from_config", "cone_number",
]
