"""Spherical metrics with cone singularities on the projective line.

A metric is ``exp(2 phi) |dz|^2`` in one of two stereographic charts:
``xi`` and ``eta = 1/xi``.  With curvature ``kappa`` the log-factor solves
``Laplacian(phi) = -kappa exp(2 phi)`` away from the marked points, and near a
marked point ``a`` of angle ``beta`` it behaves like
``(beta - 1) log|z - a|`` plus a continuous function.

Numerical solutions live on an atlas of overlapping disks ("caps").  Each cap
is centred at a marked point or at a regular point and uses log-polar
coordinates ``z = center + exp(s + i theta)``; in these coordinates the
unknown ``v = phi - (beta - 1) s`` is smooth up to the centre, so Chebyshev
collocation in ``s`` and Fourier collocation in ``theta`` converge
spectrally.  Caps are glued by interpolation on their outer circles and the
whole system is solved by damped Newton.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq, minimize_scalar, root

from . import _spectral as spec
from .core import ConeConfig, INF, AdmissibilityError, cone_number

CHARTS = ("xi", "eta")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


# ------------------------------------------------------------------ charts


def sphere_to_chart(P: np.ndarray, chart: str) -> np.ndarray:
    """Stereographic coordinate of unit vectors; ``xi`` sends the north pole to infinity."""
    P = np.atleast_2d(P)
    x, y, z = P[:, 0], P[:, 1], P[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        if chart == "xi":
            out = (x + 1j * y) / (1 - z)
        else:
            out = (x - 1j * y) / (1 + z)
    return out


def chart_to_sphere(zeta, chart: str) -> np.ndarray:
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    if chart == "eta":
        zeta = np.conj(zeta)
        sign = -1.0
    else:
        sign = 1.0
    a = np.abs(zeta) ** 2
    P = np.stack([2 * zeta.real / (1 + a), 2 * zeta.imag / (1 + a), sign * (a - 1) / (a + 1)], axis=1)
    return P


def chart_transfer(z_from, chart_from: str, chart_to: str):
    if chart_from == chart_to:
        return z_from
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / np.asarray(z_from, dtype=complex)


def point_in_chart(p, chart: str):
    """Coordinate of a marked point (complex or ``INF``) in a chart, or ``None`` if it is the chart's infinity."""
    if chart == "xi":
        return None if p == INF else complex(p)
    if p == INF:
        return 0j
    if p == 0:
        return None
    return 1.0 / complex(p)


def fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - math.sqrt(5)) * k
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


# ------------------------------------------------------------------ metrics


class ConformalMetric:
    """Base class: a conformal metric on the sphere with cone points."""

    def __init__(self, config: ConeConfig, kappa: float = 1.0):
        if kappa <= 0:
            raise ValueError("curvature must be positive")
        self.config = config
        self.kappa = float(kappa)
        self.c = float(cone_number(config.angles))

    # subclasses implement log_factor
    def log_factor(self, z, chart: str = "xi") -> np.ndarray:
        raise NotImplementedError

    def conformal_factor(self, z, chart: str = "xi") -> np.ndarray:
        return np.exp(2 * self.log_factor(z, chart))

    def punctures_in_chart(self, chart: str) -> list:
        out = []
        for p, b in zip(self.config.points, self.config.float_angles()):
            q = point_in_chart(p, chart)
            if q is not None:
                out.append((q, b))
        return out

    def singular_part(self, z, chart: str = "xi") -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        acc = np.zeros(z.shape)
        for a, b in self.punctures_in_chart(chart):
            acc = acc + (b - 1) * np.log(np.abs(z - a))
        return acc

    def regular_part(self, z, chart: str = "xi") -> np.ndarray:
        """``phi`` minus the logarithmic terms of the marked points visible in the chart."""
        return self.log_factor(z, chart) - self.singular_part(z, chart)

    def expected_area(self) -> float:
        return 4 * math.pi * self.c / self.kappa

    def local_evaluator(self, z0: complex, chart: str = "xi") -> Callable:
        """A log-factor evaluator that is smooth near ``z0`` (used by difference stencils)."""
        return lambda q: self.log_factor(q, chart)

    def stencil_groups(self, z: np.ndarray, chart: str = "xi") -> list:
        """``(mask, evaluator)`` pairs; each evaluator is smooth near its points."""
        return [(np.ones(z.shape, dtype=bool), lambda q: self.log_factor(q, chart))]

    def log_factor_in_cap(self, cap: "Cap", s: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """``phi`` at log-polar points of a cap, in the cap's chart.

        Closer than ``1e-8 R`` to a marked centre the offset ``zeta - center``
        is no longer resolved in double precision, so there the regular part
        ``phi - (beta - 1) s`` is frozen at its value on that circle.  The
        area weight ``exp(2 beta s)`` makes the effect negligible.
        """
        s = np.asarray(s, dtype=float)
        if cap.puncture is None:
            return self.log_factor(cap.center + np.exp(s + 1j * theta), cap.chart)
        floor = cap.s_max - 18.0
        sc = np.maximum(s, floor)
        phi = self.log_factor(cap.center + np.exp(sc + 1j * theta), cap.chart)
        return phi + (cap.beta - 1) * (s - sc)


class ClosedFormMetric(ConformalMetric):
    """Metric given by an explicit log-factor in the ``xi`` chart."""

    def __init__(self, config: ConeConfig, kappa: float, phi_xi: Callable,
                 phi_eta: Callable | None = None, name: str = "closed-form"):
        super().__init__(config, kappa)
        self._phi_xi = phi_xi
        self._phi_eta = phi_eta
        self.name = name

    def log_factor(self, z, chart: str = "xi") -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if chart == "xi":
            return self._phi_xi(z)
        if self._phi_eta is not None:
            return self._phi_eta(z)
        with np.errstate(divide="ignore"):
            return self._phi_xi(1.0 / z) - 2 * np.log(np.abs(z))


def round_log_factor(z, kappa: float = 1.0) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return math.log(2 / math.sqrt(kappa)) - np.log1p(np.abs(z) ** 2)


def round_sphere(kappa: float = 1.0) -> ClosedFormMetric:
    cfg = ConeConfig((0, INF), (1, 1), seifert_axes=True)
    return ClosedFormMetric(cfg, kappa, lambda z: round_log_factor(z, kappa), name="round")


def rugby_ball(beta: float, kappa: float = 1.0) -> ClosedFormMetric:
    """Cone angle ``2 pi beta`` at 0 and infinity, curvature ``kappa``."""
    b = float(beta)
    if not 0 < b <= 1:
        raise AdmissibilityError("beta must lie in (0, 1]")
    if kappa not in (1, 4, 1.0, 4.0):
        warnings.warn("rugby ball is usually requested with curvature 1 or 4")
    cfg = ConeConfig((0, INF), (beta, beta), seifert_axes=(b == 1))

    def phi(z):
        r = np.abs(z)
        with np.errstate(divide="ignore"):
            return (math.log(2 * b / math.sqrt(kappa)) + (b - 1) * np.log(r)
                    - np.log1p(r ** (2 * b)))

    return ClosedFormMetric(cfg, kappa, phi, phi, name=f"rugby({beta})")


def rugby_regular_part(beta: float, kappa: float, z) -> np.ndarray:
    """Regular part of the rugby ball in either chart (the metric is symmetric)."""
    r = np.abs(np.asarray(z, dtype=complex))
    return math.log(2 * beta / math.sqrt(kappa)) - np.log1p(r ** (2 * beta))


# ------------------------------------------------------------------ atlas


@dataclass
class Cap:
    chart: str
    center: complex
    radius: float
    beta: float = 1.0
    puncture: int | None = None
    s_min: float = -30.0
    top_scale: float = 3.0

    @property
    def s_max(self) -> float:
        return math.log(self.radius)

    # Radial coordinate: x in [-1, 1] (x = 1 on the rim) and
    # s = s_max - a sinh(b (1 - x) / 2), which keeps about half of the
    # Chebyshev nodes within ``top_scale`` of the rim.
    def _map(self):
        if getattr(self, "_ab_cache", None) is not None:
            return self._ab_cache[0]
        self._ab_cache = (self._compute_map(),)
        return self._ab_cache[0]

    def _compute_map(self):
        depth = self.s_max - self.s_min
        ratio = depth / self.top_scale
        if ratio <= 1.0 + 1e-9:
            return None
        b = brentq(lambda t: math.sinh(t) / t - ratio, 1e-6, 50.0)
        return self.top_scale / b, b

    def s_of_x(self, x):
        ab = self._map()
        y = (1 - np.asarray(x, dtype=float)) / 2
        if ab is None:
            return self.s_max - (self.s_max - self.s_min) * y
        a, b = ab
        return self.s_max - a * np.sinh(b * y)

    def x_of_s(self, s):
        ab = self._map()
        d = self.s_max - np.asarray(s, dtype=float)
        if ab is None:
            return 1 - 2 * d / (self.s_max - self.s_min)
        a, b = ab
        return 1 - 2 * np.arcsinh(d / a) / b

    def map_derivatives(self, x):
        """``ds/dx`` and ``d2s/dx2`` at ``x``."""
        ab = self._map()
        x = np.asarray(x, dtype=float)
        if ab is None:
            L = self.s_max - self.s_min
            return np.full_like(x, L / 2), np.zeros_like(x)
        a, b = ab
        y = (1 - x) / 2
        return a * b / 2 * np.cosh(b * y), -a * b * b / 4 * np.sinh(b * y)

    def ratio(self, P: np.ndarray) -> np.ndarray:
        z = sphere_to_chart(P, self.chart)
        with np.errstate(invalid="ignore"):
            r = np.abs(z - self.center) / self.radius
        r[~np.isfinite(r)] = np.inf
        return r

    def local(self, zeta):
        d = np.asarray(zeta, dtype=complex) - self.center
        with np.errstate(divide="ignore"):
            s = np.log(np.abs(d))
        return s, np.mod(np.angle(d), 2 * np.pi)


@dataclass
class AtlasOptions:
    puncture_radius: float = 2.0
    filler_radius: float = 1.0
    separation: float = 0.7
    margin: float = 0.75
    depth: float = 28.0


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = t < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2) + 1.0)
    return out


class Atlas:
    """Overlapping disks covering the sphere; marked points sit at cap centres only."""

    def __init__(self, config: ConeConfig, options: AtlasOptions | None = None):
        self.config = config
        self.options = options or AtlasOptions()
        self.caps: list = []
        self._build()

    # marked points as (chart coordinate) per chart
    def _marks(self, chart):
        out = []
        for p in self.config.points:
            q = point_in_chart(p, chart)
            if q is not None:
                out.append(q)
        return out

    def _max_radius(self, chart: str, center: complex, skip=None, cap: float = 1.0) -> float:
        r = cap
        for q in self._marks(chart):
            if skip is not None and abs(q - skip) < 1e-14:
                continue
            r = min(r, self.options.separation * abs(q - center))
        return r

    def _build(self):
        opt = self.options
        for idx, (p, b) in enumerate(zip(self.config.points, self.config.float_angles())):
            if p != INF and abs(p) <= 1:
                chart, center = "xi", complex(p)
            else:
                chart, center = "eta", point_in_chart(p, "eta")
            R = self._max_radius(chart, center, skip=center, cap=opt.puncture_radius)
            depth = opt.depth / min(2 * b, 1.0)
            self.caps.append(Cap(chart, center, R, b, idx, math.log(R) - depth))
        # greedy cover of a dense point set by regular caps
        test = fibonacci_sphere(1500)
        candidates = fibonacci_sphere(300)
        extra: list = []
        for _ in range(6):
            pts = np.vstack([test] + extra) if extra else test
            covered = self._covered(pts)
            cand_caps = [self._filler(P) for P in candidates]
            cand_caps = [c for c in cand_caps if c is not None]
            while not covered.all():
                best, best_gain, best_mask = None, 0, None
                for c in cand_caps:
                    m = (c.ratio(pts) <= opt.margin) & ~covered
                    g = int(m.sum())
                    if g > best_gain:
                        best, best_gain, best_mask = c, g, m
                if best is None:
                    raise RuntimeError("could not cover the sphere with caps")
                self.caps.append(best)
                cand_caps.remove(best)
                covered |= best_mask
            bad = self._boundary_failures()
            if bad is None:
                return
            extra.append(bad)
        raise RuntimeError("cap boundaries are not interior to the atlas")

    def _filler(self, P) -> Cap | None:
        opt = self.options
        xi = sphere_to_chart(P[None, :], "xi")[0]
        chart = "xi" if np.isfinite(xi) and abs(xi) <= 1 else "eta"
        center = complex(sphere_to_chart(P[None, :], chart)[0])
        R = self._max_radius(chart, center, cap=opt.filler_radius)
        if R < 0.05:
            return None
        return Cap(chart, center, R, 1.0, None, math.log(R) - opt.depth)

    def _covered(self, pts) -> np.ndarray:
        cov = np.zeros(len(pts), dtype=bool)
        for c in self.caps:
            cov |= c.ratio(pts) <= self.options.margin
        return cov

    def _boundary_failures(self, n: int = 64, limit: float = 0.85):
        bad = []
        for i, c in enumerate(self.caps):
            th = 2 * np.pi * np.arange(n) / n
            P = chart_to_sphere(c.center + c.radius * np.exp(1j * th), c.chart)
            best = np.full(n, np.inf)
            for j, o in enumerate(self.caps):
                if j != i:
                    best = np.minimum(best, o.ratio(P))
            if (best > limit).any():
                bad.append(P[best > limit])
        return np.vstack(bad) if bad else None

    def best_cap(self, P: np.ndarray, exclude: int | None = None):
        """Index of the cap with the smallest relative radius at each point, and that ratio."""
        ratios = np.stack([c.ratio(P) for c in self.caps], axis=0)
        if exclude is not None:
            ratios[exclude] = np.inf
        idx = np.argmin(ratios, axis=0)
        return idx, ratios[idx, np.arange(len(idx))]

    def partition_weights(self, k: int, P: np.ndarray) -> np.ndarray:
        """Smooth partition of unity subordinate to the caps, evaluated for cap ``k``."""
        num = _bump(self.caps[k].ratio(P))
        den = np.zeros(len(P))
        for c in self.caps:
            den += _bump(c.ratio(P))
        return num / den


# ------------------------------------------------------------------ quadrature


@dataclass
class AreaResult:
    area: float
    error: float
    expected: float

    @property
    def relative_error(self) -> float:
        return abs(self.area - self.expected) / self.expected


def _cap_quadrature(cap: Cap, n_s: int, n_theta: int):
    """Nodes and weights in ``(s, theta)`` concentrating points near the outer edge."""
    # the partition-of-unity bumps are steep near the rim, so the outer band gets more nodes
    edges = [cap.s_min, cap.s_max - 3.0, cap.s_max - 1.0, cap.s_max - 0.3, cap.s_max]
    parts = [spec.gauss_legendre(a, b, n_s) for a, b in zip(edges[:-1], edges[1:])]
    s = np.concatenate([p[0] for p in parts])
    ws = np.concatenate([p[1] for p in parts])
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    S, TH = np.meshgrid(s, th, indexing="ij")
    W = ws[:, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :]
    return S.ravel(), TH.ravel(), W.ravel()


def integrate(metric: ConformalMetric, density: Callable | None = None, *,
              atlas: Atlas | None = None, n_s: int = 64, n_theta: int = 96) -> float:
    """Integral of ``density * dA`` over the sphere for the metric's area form.

    ``density`` receives unit vectors and returns values; ``None`` means 1.
    """
    atlas = atlas or getattr(metric, "atlas", None) or Atlas(metric.config)
    total = 0.0
    for k, cap in enumerate(atlas.caps):
        S, TH, W = _cap_quadrature(cap, n_s, n_theta)
        zeta = cap.center + np.exp(S + 1j * TH)
        P = chart_to_sphere(zeta, cap.chart)
        pou = atlas.partition_weights(k, P)
        phi = metric.log_factor_in_cap(cap, S, TH)
        f = np.exp(2 * phi + 2 * S) * pou
        if density is not None:
            f = f * density(P)
        total += float(np.sum(f * W))
    return total


def total_area(metric: ConformalMetric, *, atlas: Atlas | None = None,
               n_s: int = 64, n_theta: int = 96) -> AreaResult:
    """Area by quadrature, with the difference to a half-resolution rule as error estimate."""
    fine = integrate(metric, atlas=atlas, n_s=n_s, n_theta=n_theta)
    coarse = integrate(metric, atlas=atlas, n_s=max(8, n_s // 2), n_theta=max(8, n_theta // 2))
    return AreaResult(fine, abs(fine - coarse), metric.expected_area())


def gauss_bonnet(metric: ConformalMetric, **kw) -> float:
    """``(1/2 pi) * integral of K dA`` with ``K = kappa``; equals ``2 c`` for a valid metric."""
    return metric.kappa * total_area(metric, **kw).area / (2 * math.pi)


# ------------------------------------------------------------------ curvature


def _laplacian_fd(f: Callable, z: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference Laplacian."""
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    offs = np.array([-2, -1, 0, 1, 2]) * h
    acc = np.zeros(z.shape)
    for ci, o in zip(c, offs):
        acc = acc + ci * (f(z + o) + f(z + 1j * o))
    return acc


def gaussian_curvature_fd(metric: ConformalMetric, point, step: float = 1e-3,
                          chart: str = "xi", check_distance: bool = True) -> np.ndarray:
    """``-exp(-2 phi) Laplacian(phi)`` by central differences in the given chart."""
    z = np.atleast_1d(np.asarray(point, dtype=complex))
    if check_distance:
        for a, _ in metric.punctures_in_chart(chart):
            if np.any(np.abs(z - a) <= 10 * step):
                raise ValueError("sample point too close to a marked point")
    out = np.empty(z.shape)
    for i, z0 in enumerate(z):
        phi = metric.local_evaluator(complex(z0), chart)
        out[i] = (-np.exp(-2 * phi(z0)) * _laplacian_fd(phi, np.array([z0]), step))[0]
    return out


def sample_points(config: ConeConfig, n: int, rng: np.random.Generator,
                  min_angle: float = 0.25) -> list:
    """Uniform points on the sphere away from the marked points, each in its nicer chart.

    ``min_angle`` is the minimum angular distance (radians, on the unit sphere)
    to every marked point.  Returns ``(chart, coordinate)`` pairs.
    """
    marks = []
    for p in config.points:
        marks.append(chart_to_sphere(point_in_chart(p, "xi"), "xi")[0] if p != INF
                     else np.array([0.0, 0.0, 1.0]))
    out = []
    while len(out) < n:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if any(math.acos(max(-1.0, min(1.0, float(v @ m)))) < min_angle for m in marks):
            continue
        xi = sphere_to_chart(v[None, :], "xi")[0]
        if abs(xi) <= 1:
            out.append(("xi", complex(xi)))
        else:
            out.append(("eta", complex(sphere_to_chart(v[None, :], "eta")[0])))
    return out


def curvature_check(metric: ConformalMetric, n: int = 100, seed: int = 0x5EED,
                    step: float = 1e-3, min_angle: float = 0.25) -> np.ndarray:
    """Finite-difference curvature at seeded sample points (both charts)."""
    rng = np.random.default_rng(seed)
    pts = sample_points(metric.config, n, rng, min_angle)
    out = np.empty(len(pts))
    for i, (chart, z) in enumerate(pts):
        out[i] = gaussian_curvature_fd(metric, z, step, chart)[0]
    return out


# ------------------------------------------------------------------ solver


@dataclass
class SolverOptions:
    n_radial: int = 32
    n_angular: int = 32
    tol: float = 1e-10
    max_iter: int = 40
    max_step: float = 0.5
    min_step: float = 1 / 64
    atlas: AtlasOptions = field(default_factory=AtlasOptions)


@dataclass
class SolveReport:
    residual: float
    iterations: int
    continuation_steps: int
    unknowns: int
    caps: int


class CapSolution(ConformalMetric):
    """Solution of the Liouville equation stored on an atlas of log-polar caps."""

    def __init__(self, config: ConeConfig, kappa: float, atlas: Atlas,
                 values: list, n_radial: int, n_angular: int, report: SolveReport | None = None):
        super().__init__(config, kappa)
        self.atlas = atlas
        self.values = values
        self.n_radial = n_radial
        self.n_angular = n_angular
        self.report = report
        self._x, _ = spec.cheb(n_radial)
        self._bary = spec.cheb_bary_weights(n_radial)

    def _cap_v(self, k: int, s: np.ndarray, theta: np.ndarray) -> np.ndarray:
        cap = self.atlas.caps[k]
        s = np.clip(s, cap.s_min, cap.s_max)
        x = cap.x_of_s(s)
        Ls = spec.cheb_interp_matrix(self._x, self._bary, x)
        Wt = spec.trig_interp_matrix(self.n_angular, theta)
        return np.einsum("pi,ij,pj->p", Ls, self.values[k], Wt)

    def log_factor_in_cap(self, cap: Cap, s, theta) -> np.ndarray:
        k = self.atlas.caps.index(cap)
        s = np.asarray(s, dtype=float)
        return self._cap_v(k, s.ravel(), np.asarray(theta, float).ravel()).reshape(s.shape) + (cap.beta - 1) * s

    def _phi_from_cap(self, k: int, z: np.ndarray, chart: str) -> np.ndarray:
        cap = self.atlas.caps[k]
        zc = chart_transfer(z, chart, cap.chart)
        s, th = cap.local(zc)
        phi = self._cap_v(k, s, th) + (cap.beta - 1) * s
        if cap.chart != chart:
            # phi_target = phi_source + log|d zeta_source / d zeta_target| = phi_source - 2 log|z|
            phi = phi - 2 * np.log(np.abs(z))
        return phi

    def local_evaluator(self, z0: complex, chart: str = "xi") -> Callable:
        # one cap for the whole stencil: switching caps between stencil points
        # would turn interpolation differences into O(1 / step^2) noise
        k = int(self.atlas.best_cap(chart_to_sphere(z0, chart))[0][0])
        return lambda q: self._phi_from_cap(k, np.atleast_1d(np.asarray(q, dtype=complex)), chart)

    def stencil_groups(self, z: np.ndarray, chart: str = "xi") -> list:
        idx, _ = self.atlas.best_cap(chart_to_sphere(np.ravel(z), chart))
        idx = idx.reshape(np.shape(z))
        out = []
        for k in np.unique(idx):
            k = int(k)
            out.append((idx == k, lambda q, k=k: self._phi_from_cap(
                k, np.atleast_1d(np.asarray(q, dtype=complex)), chart)))
        return out

    def log_factor(self, z, chart: str = "xi") -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        P = chart_to_sphere(z.ravel(), chart)
        idx, _ = self.atlas.best_cap(P)
        out = np.empty(z.size)
        zf = z.ravel()
        for k in np.unique(idx):
            m = idx == k
            out[m] = self._phi_from_cap(int(k), zf[m], chart)
        return out.reshape(z.shape)

    def regular_part(self, z, chart: str = "xi") -> np.ndarray:
        """Continuous part; exact at the marked points via the centred cap."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.size)
        zf = z.ravel()
        P = chart_to_sphere(zf, chart)
        idx, _ = self.atlas.best_cap(P)
        punct = self.punctures_in_chart(chart)
        for k in np.unique(idx):
            m = idx == k
            cap = self.atlas.caps[int(k)]
            zz = zf[m]
            zc = chart_transfer(zz, chart, cap.chart)
            s, th = cap.local(zc)
            val = self._cap_v(int(k), s, th)
            centred = cap.puncture is not None and cap.chart == chart
            if not centred:
                val = val + (cap.beta - 1) * s
            if cap.chart != chart:
                val = val - 2 * np.log(np.abs(zz))
            for a, b in punct:
                if centred and abs(a - cap.center) < 1e-14:
                    continue
                with np.errstate(divide="ignore"):
                    val = val - (b - 1) * np.log(np.abs(zz - a))
            out[m] = val
        return out.reshape(z.shape)

    # ---- serialization
    def to_json(self) -> dict:
        caps = []
        for cap, V in zip(self.atlas.caps, self.values):
            caps.append({
                "chart": cap.chart, "center": [cap.center.real, cap.center.imag],
                "radius": cap.radius, "beta": cap.beta, "puncture": cap.puncture,
                "s_min": cap.s_min,
                "values": [format(x, ".17g") for x in np.asarray(V).ravel()],
            })
        rep = None
        if self.report is not None:
            rep = dict(self.report.__dict__)
        return {"schema": "conekit/1", "kind": "cap-solution", "config": self.config.to_json(),
                "kappa": self.kappa, "n_radial": self.n_radial, "n_angular": self.n_angular,
                "caps": caps, "report": rep}

    @classmethod
    def from_json(cls, data) -> "CapSolution":
        if isinstance(data, str):
            data = json.loads(data)
        cfg = ConeConfig.from_json(data["config"])
        atlas = Atlas.__new__(Atlas)
        atlas.config = cfg
        atlas.options = AtlasOptions()
        atlas.caps = []
        values = []
        nr, na = int(data["n_radial"]), int(data["n_angular"])
        for c in data["caps"]:
            atlas.caps.append(Cap(c["chart"], complex(*c["center"]), float(c["radius"]),
                                  float(c["beta"]), c["puncture"], float(c["s_min"])))
            values.append(np.array([float(x) for x in c["values"]]).reshape(nr + 1, na))
        rep = SolveReport(**data["report"]) if data.get("report") else None
        return cls(cfg, float(data["kappa"]), atlas, values, nr, na, rep)


class _CapSystem:
    """Discrete equations for all caps: linear part, interface constants, nonlinearity."""

    def __init__(self, atlas: Atlas, kappa: float, n_radial: int, n_angular: int):
        self.atlas = atlas
        self.kappa = kappa
        self.nr, self.na = n_radial, n_angular
        self.block = (n_radial + 1) * n_angular
        self.n = self.block * len(atlas.caps)
        x, D = spec.cheb(n_radial)
        self.x, self.D = x, D
        self.bary = spec.cheb_bary_weights(n_radial)
        D2t = spec.fourier_d2(n_angular)
        rows, cols, vals = [], [], []
        self.interior = np.zeros(self.n, dtype=bool)
        self.s_nodes = np.zeros(self.n)
        self.cap_of = np.zeros(self.n, dtype=int)
        # interface data: (row, donor s, own s_max, charts differ term, donor cap, own cap)
        self.iface = []
        for k, cap in enumerate(atlas.caps):
            off = k * self.block
            s = cap.s_of_x(x)
            sx, sxx = cap.map_derivatives(x)
            Ds = D / sx[:, None]
            D2s = (D @ D) / (sx ** 2)[:, None] - (sxx / sx ** 3)[:, None] * D
            lap = np.kron(D2s, np.eye(n_angular)) + np.kron(np.eye(n_radial + 1), D2t)
            idx = np.arange(self.block).reshape(n_radial + 1, n_angular)
            self.s_nodes[off:off + self.block] = np.repeat(s, n_angular)
            self.cap_of[off:off + self.block] = k
            inner = idx[1:n_radial].ravel()
            sub = lap[inner]
            r, c = np.nonzero(sub)
            rows.append(off + inner[r]); cols.append(off + c); vals.append(sub[r, c])
            self.interior[off + inner] = True
            # Neumann condition at the deep end (s = s_min is node n_radial)
            neu = np.kron(Ds[n_radial][None, :], np.eye(n_angular))
            r, c = np.nonzero(neu)
            rows.append(off + idx[n_radial][r]); cols.append(off + c); vals.append(neu[r, c])
            # outer circle: own value minus interpolated donor value
            th = 2 * np.pi * np.arange(n_angular) / n_angular
            zeta = cap.center + cap.radius * np.exp(1j * th)
            P = chart_to_sphere(zeta, cap.chart)
            donors, _ = atlas.best_cap(P, exclude=k)
            for j in range(n_angular):
                row = off + idx[0, j]
                b = int(donors[j])
                dcap = atlas.caps[b]
                zb = chart_transfer(zeta[j], cap.chart, dcap.chart)
                sb, tb = dcap.local(np.array([zb]))
                xb = dcap.x_of_s(sb)
                w = np.kron(spec.cheb_interp_matrix(x, self.bary, xb)[0],
                            spec.trig_interp_matrix(n_angular, tb)[0])
                rows.append(np.array([row])); cols.append(np.array([row])); vals.append(np.array([1.0]))
                nzw = np.nonzero(np.abs(w) > 1e-15)[0]
                rows.append(np.full(nzw.size, row)); cols.append(b * self.block + nzw); vals.append(-w[nzw])
                shift = -2 * math.log(abs(zeta[j])) if dcap.chart != cap.chart else 0.0
                self.iface.append((row, float(sb[0]), cap.s_max, shift, b, k))
        self.L = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(self.n, self.n))
        self.iface_rows = np.array([t[0] for t in self.iface])

    def betas_per_node(self, cap_betas: np.ndarray) -> np.ndarray:
        return cap_betas[self.cap_of]

    def rhs(self, cap_betas: np.ndarray) -> np.ndarray:
        b = np.zeros(self.n)
        for row, sb, smax, shift, donor, own in self.iface:
            b[row] = (cap_betas[donor] - 1) * sb + shift - (cap_betas[own] - 1) * smax
        return b

    def residual(self, V, betas_node, b):
        F = self.L @ V - b
        ex = np.zeros(self.n)
        m = self.interior
        ex[m] = self.kappa * np.exp(2 * betas_node[m] * self.s_nodes[m] + 2 * V[m])
        return F + ex, ex

    def jacobian(self, ex):
        return (self.L + sp.diags(2 * ex)).tocsc()


def _newton(system: _CapSystem, V, cap_betas, tol, max_iter, patience: int = 12):
    """Damped Newton; the line search uses the 2-norm, convergence the max-norm.

    Gives up after ``patience`` consecutive heavily damped steps, which is how a
    start outside the basin shows itself.
    """
    betas_node = system.betas_per_node(cap_betas)
    b = system.rhs(cap_betas)
    F, ex = system.residual(V, betas_node, b)
    merit = np.linalg.norm(F)
    slow = 0
    for it in range(max_iter):
        res = float(np.max(np.abs(F)))
        if res < tol:
            return V, res, it, True
        lu = spla.splu(system.jacobian(ex), permc_spec="MMD_AT_PLUS_A")
        dV = lu.solve(-F)
        if not np.all(np.isfinite(dV)):
            return V, res, it, False
        lam = 1.0
        while True:
            with np.errstate(over="ignore"):
                Fn, exn = system.residual(V + lam * dV, betas_node, b)
            mn = np.linalg.norm(Fn)
            if np.isfinite(mn) and mn < (1 - 1e-4 * lam) * merit:
                break
            lam /= 2
            if lam < 1e-3:
                return V, res, it, False
        slow = slow + 1 if lam < 0.1 else 0
        if slow >= patience:
            return V, res, it, False
        V = V + lam * dV
        F, ex, merit = Fn, exn, mn
    res = float(np.max(np.abs(F)))
    return V, res, max_iter, res < tol


def _best_shift(system: _CapSystem, V, cap_betas) -> np.ndarray:
    """Add the constant that minimizes the residual; fixes the total area of the guess."""
    betas_node = system.betas_per_node(cap_betas)
    b = system.rhs(cap_betas)

    def merit(C):
        with np.errstate(over="ignore"):
            r = np.linalg.norm(system.residual(V + C, betas_node, b)[0])
        return r if np.isfinite(r) else 1e300

    best = minimize_scalar(merit, bounds=(-6.0, 6.0), method="bounded")
    return V + best.x


def _boost(rapidity: np.ndarray, P: np.ndarray):
    """Apply the Moebius boost with rapidity vector ``rapidity`` to unit vectors ``P``.

    Returns the images and ``log`` of the conformal factor of the boost at ``P``.
    """
    t = float(np.linalg.norm(rapidity))
    if t < 1e-14:
        return P, np.zeros(len(P))
    n = rapidity / t
    x = P @ n
    den = math.cosh(t) - math.sinh(t) * x
    along = (x * math.cosh(t) - math.sinh(t)) / den
    perp = (P - np.outer(x, n)) / den[:, None]
    return perp + np.outer(along, n), -np.log(den)


def _balancing_boost(marks: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Rapidity of the boost that moves the weighted centre of mass of ``marks`` to the origin.

    As all angles tend to 1 the solution tends to the round metric pulled back
    by this boost, so it fixes the position of the guess on the Moebius orbit.
    """
    if weights.sum() <= 0:
        return np.zeros(3)

    def centre(v):
        return weights @ _boost(v, marks)[0] / weights.sum()

    sol = root(centre, np.zeros(3), method="hybr")
    if not sol.success or np.linalg.norm(centre(sol.x)) > 1e-8:
        return np.zeros(3)
    return sol.x


def _initial_guess(system: _CapSystem, config: ConeConfig, cap_betas: np.ndarray,
                   kappa: float) -> np.ndarray:
    """Boosted round metric times chordal-distance powers: right angles, curvature not yet constant."""
    atlas = system.atlas
    beta_of = {cap.puncture: cap_betas[k] for k, cap in enumerate(atlas.caps) if cap.puncture is not None}
    marks = []
    for j, p in enumerate(config.points):
        P = np.array([0.0, 0.0, 1.0]) if p == INF else chart_to_sphere(complex(p), "xi")[0]
        marks.append((j, P))
    weights = np.array([1 - beta_of[j] for j, _ in marks])
    rapidity = _balancing_boost(np.array([P for _, P in marks]), weights)
    # chordal distances scale by sqrt(lambda(P) lambda(P_j)) under the boost; constants are
    # left to the shift fit
    boost_weight = 1 - 0.5 * weights.sum()
    nth = system.na
    V = np.empty(system.n)
    for k, cap in enumerate(atlas.caps):
        off = k * system.block
        s = system.s_nodes[off:off + system.block]
        th = np.tile(2 * np.pi * np.arange(nth) / nth, system.nr + 1)
        zeta = cap.center + np.exp(s + 1j * th)
        v = round_log_factor(zeta, kappa)
        P = chart_to_sphere(zeta, cap.chart)
        v = v + boost_weight * _boost(rapidity, P)[1]
        for j, Pj in marks:
            bj = beta_of[j] - 1
            if cap.puncture == j:
                # log of the chordal distance, minus s, computed without cancellation
                v = v + bj * (-0.5 * np.log1p(np.abs(zeta) ** 2) - 0.5 * math.log1p(abs(cap.center) ** 2))
            else:
                v = v + bj * np.log(np.linalg.norm(P - Pj, axis=1) / 2)
        V[off:off + system.block] = v
    return V


def solve_liouville(config: ConeConfig, kappa: float = 1.0,
                    options: SolverOptions | None = None, **kw) -> CapSolution:
    """Spherical metric of curvature ``kappa`` with the configuration's cone angles."""
    opt = options or SolverOptions(**kw)
    if config.seifert_axes and any(float(b) == 1 for b in config.angles):
        raise AdmissibilityError("solver needs every angle below 1")
    rep = config.troyanov()
    if not rep.passed:
        raise AdmissibilityError(f"configuration fails the existence test: {rep.reason}")
    atlas = Atlas(config, opt.atlas)
    system = _CapSystem(atlas, kappa, opt.n_radial, opt.n_angular)
    target = np.array([c.beta for c in atlas.caps])

    def guess(betas):
        return _best_shift(system, _initial_guess(system, config, betas, kappa), betas)

    Vd, res, total_its, ok = _newton(system, guess(target), target, opt.tol, opt.max_iter)
    steps = 0
    if not ok:
        # continuation in t, betas = 1 - t (1 - target), with adaptive steps and a
        # secant predictor; near t = 0 the linearization is close to singular, so
        # the first step is taken large
        done = []  # converged (t, V), at most the last two
        h = opt.max_step
        while not done or done[-1][0] < 1:
            t0 = done[-1][0] if done else 0.0
            t = min(1.0, t0 + h)
            betas = 1 - t * (1 - target)
            if not done:
                start = guess(betas)
            elif len(done) == 1:
                start = done[-1][1]
            else:
                (ta, Va), (tb, Vb) = done
                start = Vb + (t - tb) / (tb - ta) * (Vb - Va)
            Vc, res, its, ok = _newton(system, start, betas, opt.tol, opt.max_iter)
            total_its += its
            steps += 1
            if ok:
                done = (done + [(t, Vc)])[-2:]
                h = min(2 * h, opt.max_step)
            else:
                h /= 2
                if h < opt.min_step:
                    raise ConvergenceError(f"Newton stalled during continuation at t={t:.3f}", res)
        Vd = done[-1][1]
    values = [Vd[k * system.block:(k + 1) * system.block].reshape(opt.n_radial + 1, opt.n_angular)
              for k in range(len(atlas.caps))]
    report = SolveReport(float(res), total_its, steps, system.n, len(atlas.caps))
    return CapSolution(config, kappa, atlas, values, opt.n_radial, opt.n_angular, report)
