"""Chebyshev and Fourier collocation helpers used by the cap solver."""

from __future__ import annotations

import numpy as np


def cheb(n: int):
    """Chebyshev points ``cos(pi j / n)`` on [-1, 1] and the differentiation matrix."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def cheb_bary_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def cheb_interp_matrix(x_nodes: np.ndarray, bary: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rows of Lagrange weights evaluating the interpolant at ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x[:, None] - x_nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15, rtol=0.0)
    diff[exact] = 1.0
    terms = bary[None, :] / diff
    out = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if hit.any():
        out[hit] = exact[hit].astype(float)
    return out


def fourier_d2(n: int) -> np.ndarray:
    """Second-derivative matrix for ``n`` (even) equispaced periodic nodes on [0, 2 pi)."""
    if n % 2:
        raise ValueError("use an even number of angular nodes")
    h = 2 * np.pi / n
    k = np.arange(n)
    col = np.empty(n)
    col[0] = -np.pi ** 2 / (3 * h ** 2) - 1.0 / 6.0
    kk = k[1:]
    col[1:] = -0.5 * (-1.0) ** kk / np.sin(h * kk / 2) ** 2
    idx = (k[:, None] - k[None, :]) % n
    return col[idx]


def fourier_d1(n: int) -> np.ndarray:
    h = 2 * np.pi / n
    k = np.arange(n)
    col = np.zeros(n)
    kk = k[1:]
    col[1:] = 0.5 * (-1.0) ** kk / np.tan(h * kk / 2)
    idx = (k[:, None] - k[None, :]) % n
    return col[idx]


def trig_interp_matrix(n: int, theta: np.ndarray) -> np.ndarray:
    """Weights of the band-limited periodic interpolant through ``n`` equispaced nodes."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    nodes = 2 * np.pi * np.arange(n) / n
    delta = theta[:, None] - nodes[None, :]
    m = np.arange(1, n // 2)
    # 1 + 2 sum_{m < n/2} cos(m delta) + cos(n/2 delta), divided by n
    acc = np.ones_like(delta)
    for mm in m:
        acc += 2 * np.cos(mm * delta)
    acc += np.cos((n // 2) * delta)
    return acc / n


def gauss_legendre(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w
