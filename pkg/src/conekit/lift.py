"""Connection forms on the Hopf bundle and the lifted metrics on the three-sphere.

For a curvature-4 spherical metric ``g = exp(2 phi)|d xi|^2`` with cone
number ``c`` and regular part ``u`` (``phi`` minus the log terms of the finite
marked points) the connection is

    alpha0 = (1 / 2c) (u_y dx - u_x dy),      d alpha0 = (1 / 2c) K dV.

In the trivialization ``(xi, t)`` the lifted metric is
``g + c^2 (dt + alpha0)^2``.  Derivatives of ``u`` are taken by
fourth-order central differences of the metric's own evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _spectral as spec
from .core import ConeConfig, INF, AdmissibilityError
from .spherical import ConformalMetric, integrate, sphere_to_chart

_FD = (np.array([1.0, -8.0, 8.0, -1.0]) / 12.0, np.array([-2, -1, 1, 2]))


def _d1(f, x0, h, direction=1.0):
    c, o = _FD
    return sum(ci * f(x0 + oi * h * direction) for ci, oi in zip(c, o)) / h


class ConnectionForm:
    """``alpha0`` for a curvature-4 metric.

    The ``xi``-chart form is the one normalized by trivial holonomy at the
    finite marked points.  The ``eta``-chart form built the same way from the
    ``eta`` regular part differs from it by a closed form, which does not
    affect curvature or volume.
    """

    def __init__(self, metric: ConformalMetric, step: float = 1e-4):
        if abs(metric.kappa - 4.0) > 1e-12:
            raise ValueError("the Hopf construction uses curvature 4")
        self.metric = metric
        self.c = float(metric.c)
        self.step = step
        self.finite = [(complex(p), float(b)) for p, b in metric.config.finite()]

    def regular_part(self, z, evaluator=None, chart: str = "xi") -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        phi = evaluator(z) if evaluator is not None else self.metric.log_factor(z, chart)
        marks = self.finite if chart == "xi" else self.metric.punctures_in_chart(chart)
        for a, b in marks:
            phi = phi - (b - 1) * np.log(np.abs(z - a))
        return phi

    def gradient_u(self, z, chart: str = "xi") -> tuple:
        """``(u_x, u_y)``; every difference stencil is evaluated in a single cap."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        ux = np.empty(z.shape)
        uy = np.empty(z.shape)
        h = self.step * np.maximum(1.0, np.abs(z))
        for mask, ev in self.metric.stencil_groups(z, chart):
            u = lambda q: self.regular_part(q, ev, chart)
            ux[mask] = _d1(u, z[mask], h[mask], 1.0)
            uy[mask] = _d1(u, z[mask], h[mask], 1j)
        return ux, uy

    def alpha(self, z, chart: str = "xi") -> tuple:
        """Components ``(a_x, a_y)`` of ``alpha0 = a_x dx + a_y dy``."""
        ux, uy = self.gradient_u(z, chart)
        return uy / (2 * self.c), -ux / (2 * self.c)

    def curvature_density(self, z) -> np.ndarray:
        """``d alpha0 / (dx dy) = -Laplacian(u) / 2c`` by finite differences."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape)
        h = 1e-3
        c5 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
        offs = np.array([-2, -1, 0, 1, 2]) * h
        for i, z0 in np.ndenumerate(z):
            ev = self.metric.local_evaluator(complex(z0), "xi")
            u = lambda q: self.regular_part(np.atleast_1d(q), ev)[0]
            lap = sum(ci * (u(z0 + o) + u(z0 + 1j * o)) for ci, o in zip(c5, offs))
            out[i] = -lap / (2 * self.c)
        return out

    def expected_density(self, z) -> np.ndarray:
        """``(1/2c) K exp(2 phi)`` with ``K = 4``."""
        return 4 * np.exp(2 * self.metric.log_factor(z, "xi")) / (2 * self.c)

    # ---- loop integrals
    def flux(self, center: complex, radius: float, n_theta: int = 64, chart: str = "xi") -> float:
        """Outward flux of ``grad u`` through ``|zeta - center| = radius``.

        Parametrized by ``s = log radius``: the flux is the integral over theta
        of ``du/ds``, which a trapezoid rule integrates spectrally.
        """
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        s0 = math.log(radius)
        h = 1e-3
        vals = np.empty(n_theta)
        for k, th in enumerate(theta):
            zc = center + radius * np.exp(1j * th)
            ev = self.metric.local_evaluator(complex(zc), chart)
            u = lambda s: self.regular_part(
                np.atleast_1d(center + np.exp(s + 1j * th)), ev, chart)[0]
            vals[k] = _d1(u, s0, h)
        return float(np.mean(vals) * 2 * np.pi)

    def loop_integral(self, center: complex, radius: float, n_theta: int = 64,
                      chart: str = "xi") -> float:
        """Integral of ``alpha0`` counter-clockwise around the circle."""
        return -self.flux(center, radius, n_theta, chart) / (2 * self.c)

    def holonomy_table(self, center: complex, radii=(1e-1, 1e-2, 1e-3, 1e-4)) -> list:
        return [(r, self.loop_integral(center, r)) for r in radii]

    def total_curvature_quadrature(self, **kw) -> float:
        """``(1/2 pi) * integral of d alpha0`` from the area form."""
        return 4 * integrate(self.metric, **kw) / (2 * self.c) / (2 * math.pi)

    def total_curvature_stokes(self, small: float = 1e-9, n_theta: int = 128) -> float:
        """``(1/2 pi) * integral of d alpha0`` by Stokes on two discs.

        The sphere is split along ``|xi| = R`` into a disc in each chart; each
        contributes its boundary loop minus small loops around the marked
        points inside it.
        """
        marks = [abs(a) for a, _ in self.finite]
        R = next(r for r in (1.0, 0.8, 1.25, 0.6, 1.6, 0.45, 2.2)
                 if all(abs(m - r) > 0.1 * r for m in marks))
        total = 0.0
        for chart, rad in (("xi", R), ("eta", 1.0 / R)):
            total += self.loop_integral(0j, rad, n_theta, chart)
            for a, _ in self.metric.punctures_in_chart(chart):
                if abs(a) < rad:
                    total -= self.loop_integral(a, small, chart=chart)
        return total / (2 * math.pi)


def holonomy_decreasing(table, final_tol: float = 1e-2) -> bool:
    mags = [abs(v) for _, v in table]
    return all(b < a for a, b in zip(mags, mags[1:])) and mags[-1] < final_tol


# ------------------------------------------------------------------ lifted metric


class LinkMetric:
    """``g + c^2 (dt + alpha0)^2`` on the three-sphere, in the ``(x, y, t)`` trivialization."""

    def __init__(self, base: ConformalMetric, connection: ConnectionForm):
        if connection.metric is not base:
            raise ValueError("connection was built from a different metric")
        self.base = base
        self.connection = connection
        self.c = connection.c

    def metric_matrix(self, z, chart: str = "xi") -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        e2 = np.exp(2 * self.base.log_factor(z, chart))
        ax, ay = self.connection.alpha(z, chart)
        c2 = self.c ** 2
        G = np.zeros(z.shape + (3, 3))
        a = np.stack([ax, ay], axis=-1)
        G[..., 0, 0] = e2 + c2 * ax * ax
        G[..., 1, 1] = e2 + c2 * ay * ay
        G[..., 0, 1] = G[..., 1, 0] = c2 * ax * ay
        G[..., 0, 2] = G[..., 2, 0] = c2 * a[..., 0]
        G[..., 1, 2] = G[..., 2, 1] = c2 * a[..., 1]
        G[..., 2, 2] = c2
        return G

    def fiber_length(self, z) -> np.ndarray:
        G = self.metric_matrix(z)
        return 2 * np.pi * np.sqrt(G[..., 2, 2])

    def submersion_defect(self, z, vectors) -> np.ndarray:
        """Relative difference between the lifted length of horizontal lifts and the base length."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        G = self.metric_matrix(z)
        ax, ay = self.connection.alpha(z)
        lift = np.stack([V[:, 0], V[:, 1], -(ax * V[:, 0] + ay * V[:, 1])], axis=-1)
        top = np.einsum("pi,pij,pj->p", lift, G, lift)
        base = np.exp(2 * self.base.log_factor(z, "xi")) * (V[:, 0] ** 2 + V[:, 1] ** 2)
        return np.abs(top / base - 1)

    def volume_density(self, z, chart: str = "xi") -> np.ndarray:
        """``sqrt(det)`` of the metric matrix: volume per ``dx dy dt``."""
        return np.sqrt(np.linalg.det(self.metric_matrix(z, chart)))

    def volume(self, n_s: int = 32, n_theta: int = 48) -> float:
        """Quadrature of ``sqrt(det)`` over the base, times ``2 pi`` for the fiber.

        The atlas quadrature integrates ``density * exp(2 phi)``, so the density
        passed to it is ``sqrt(det) / exp(2 phi)``, evaluated in whichever
        chart has ``|zeta| <= 1``.
        """

        def density(P):
            out = np.empty(len(P))
            xi = sphere_to_chart(P, "xi")
            near = np.isfinite(xi) & (np.abs(xi) <= 1)
            for chart, mask in (("xi", near), ("eta", ~near)):
                if mask.any():
                    z = sphere_to_chart(P[mask], chart)
                    out[mask] = (self.volume_density(z, chart)
                                 / np.exp(2 * self.base.log_factor(z, chart)))
            return out

        return 2 * np.pi * integrate(self.base, density, n_s=n_s, n_theta=n_theta)

    def expected_volume(self) -> float:
        return 2 * math.pi ** 2 * self.c ** 2


def build_connection(metric: ConformalMetric, step: float = 1e-4) -> ConnectionForm:
    return ConnectionForm(metric, step)


def hopf_lift(metric: ConformalMetric, connection: ConnectionForm | None = None) -> LinkMetric:
    return LinkMetric(metric, connection or build_connection(metric))


# ------------------------------------------------------------------ Seifert pullback


@dataclass
class SeifertLink:
    """Pullback of a link metric by ``(z1, z2) -> (z1^q, z2^p) / norm``."""

    link: LinkMetric
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < self.p or math.gcd(self.p, self.q) != 1:
            raise AdmissibilityError("need coprime 1 <= p <= q")
        cfg = self.link.base.config
        b0 = _angle_at(cfg, 0)
        binf = cfg.angle_at_infinity()
        if b0 is None or binf is None:
            raise AdmissibilityError("Seifert pullback needs marked points at 0 and infinity")
        self.axis_angles = (self.q * Fraction(b0) if not isinstance(b0, float) else self.q * b0,
                            self.p * Fraction(binf) if not isinstance(binf, float) else self.p * binf)
        if any(a > 1 for a in self.axis_angles):
            raise AdmissibilityError("pulled-back axis angles exceed 1")

    @property
    def c_tilde(self) -> float:
        return self.p * self.q * self.link.c

    def target(self, xi, t):
        """Image ``(xi_T, t_T)`` of the trivialization point ``(xi, t)``."""
        xi = np.asarray(xi, dtype=complex)
        k = (self.p - self.q) / 2
        xt = xi ** self.q * (1 + np.abs(xi) ** 2) ** k * np.exp(1j * (self.q - self.p) * t)
        return xt, self.p * np.asarray(t)

    def jacobian(self, xi, t) -> np.ndarray:
        """Real Jacobian of ``(x, y, t) -> (X, Y, T)``."""
        xi = np.asarray(xi, dtype=complex)
        t = np.asarray(t, dtype=float)
        p, q = self.p, self.q
        k = (p - q) / 2
        r2 = np.abs(xi) ** 2
        ph = np.exp(1j * (q - p) * t)
        A = ph * (q * xi ** (q - 1) * (1 + r2) ** k + xi ** q * k * (1 + r2) ** (k - 1) * np.conj(xi))
        B = ph * xi ** q * k * (1 + r2) ** (k - 1) * xi
        dx = A + B
        dy = 1j * (A - B)
        dt = 1j * (q - p) * xi ** q * (1 + r2) ** k * ph
        J = np.zeros(xi.shape + (3, 3))
        J[..., 0, 0], J[..., 1, 0] = dx.real, dx.imag
        J[..., 0, 1], J[..., 1, 1] = dy.real, dy.imag
        J[..., 0, 2], J[..., 1, 2] = dt.real, dt.imag
        J[..., 2, 2] = p
        return J

    def metric_matrix(self, xi, t) -> np.ndarray:
        xt, _ = self.target(xi, t)
        G = self.link.metric_matrix(xt)
        J = self.jacobian(xi, t)
        return np.einsum("...ki,...kl,...lj->...ij", J, G, J)

    def volume(self, n_s: int = 48, n_theta: int = 48, n_t: int = 16, span: float = 14.0) -> float:
        """Quadrature over ``log|xi|`` in ``[-span, span]``, ``arg xi`` and ``t``."""
        edges = np.linspace(-span, span, 9)
        s_nodes, s_w = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            x, w = spec.gauss_legendre(a, b, n_s)
            s_nodes.append(x)
            s_w.append(w)
        s = np.concatenate(s_nodes)
        ws = np.concatenate(s_w)
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        tt = 2 * np.pi * np.arange(n_t) / n_t
        total = 0.0
        for ti in tt:
            S, TH = np.meshgrid(s, th, indexing="ij")
            xi = np.exp(S + 1j * TH).ravel()
            dens = np.sqrt(np.abs(np.linalg.det(self.metric_matrix(xi, np.full(xi.shape, ti)))))
            # dx dy = r^2 ds dtheta
            total += np.sum(dens * np.exp(2 * S.ravel()) * np.repeat(ws, n_theta))
        return total * (2 * np.pi / n_theta) * (2 * np.pi / n_t)


def _angle_at(cfg: ConeConfig, point: complex):
    for p, b in zip(cfg.points, cfg.angles):
        if p != INF and abs(p - point) < 1e-14:
            return b
    return None


def seifert_pullback(link: LinkMetric, p: int, q: int) -> SeifertLink:
    return SeifertLink(link, p, q)


def seifert_example_window(p: int, q: int) -> tuple:
    """Open interval of ``beta`` for which ``(1/q, 1/p, beta)`` is admissible."""
    return (1 - Fraction(1, p) - Fraction(1, q), 1 - Fraction(1, p) + Fraction(1, q))
