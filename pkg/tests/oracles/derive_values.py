"""Independent sympy derivations of the frozen values in ``tests/frozen_values.py``.

Nothing here imports ``conekit``.  Run ``python tests/oracles/derive_values.py``
to print the values; the test suite compares the frozen literals against the
package and, in ``test_oracles.py``, against a fresh run of these functions.
"""

from __future__ import annotations

import sympy as sp

r, th, b, s = sp.symbols("r theta beta s", positive=True)
x1, y1, x2, y2 = sp.symbols("x1 y1 x2 y2", real=True)


def rugby_unit_loop(beta) -> sp.Expr:
    """Integral of alpha0 around |xi| = 1 for the curvature-4 rugby ball.

    u = log(beta) - log(1 + r^(2 beta)); alpha0 = (1/2c)(u_y dx - u_x dy) with c = beta.
    Around a circle, alpha0 integrates to -(1/2c) * flux of grad u.
    """
    u = sp.log(beta) - sp.log(1 + sp.exp(2 * beta * s))
    du_ds = sp.diff(u, s).subs(s, 0)
    flux = 2 * sp.pi * du_ds
    return sp.simplify(-flux / (2 * beta))


def rugby_holonomy(beta, radius) -> sp.Expr:
    """Loop integral of alpha0 around |xi| = radius for the same metric."""
    u = sp.log(beta) - sp.log(1 + sp.exp(2 * beta * s))
    du_ds = sp.diff(u, s).subs(s, sp.log(radius))
    return sp.simplify(-2 * sp.pi * du_ds / (2 * beta))


def product_volume_density(beta, z, w) -> sp.Expr:
    """det of the complex Hessian of beta^-2 (|z|^(2 beta) + |w|^(2 beta)) at (z, w)."""
    pot = ((x1 ** 2 + y1 ** 2) ** beta + (x2 ** 2 + y2 ** 2) ** beta) / beta ** 2
    X = [(x1, y1), (x2, y2)]
    M = sp.zeros(2, 2)
    for i in range(2):
        for j in range(2):
            xi, yi = X[i]
            xj, yj = X[j]
            M[i, j] = sp.Rational(1, 4) * (sp.diff(pot, xi, xj) + sp.diff(pot, yi, yj)
                                           + sp.I * (sp.diff(pot, xi, yj) - sp.diff(pot, yi, xj)))
    val = M.det().subs({x1: sp.re(z), y1: sp.im(z), x2: sp.re(w), y2: sp.im(w)})
    return sp.nsimplify(sp.simplify(val))


def a3_energy(m: int) -> sp.Rational:
    """E = chi(P^2) + (beta - 1) chi(smoothed curve) for 3m + 3 lines with beta = m/(m+1)."""
    k = 3 * m + 3
    beta = sp.Rational(m, m + 1)
    chi_curve = 2 - (k - 1) * (k - 2)
    return 3 + (beta - 1) * chi_curve


def rugby_area(beta, kappa) -> sp.Expr:
    """Area of exp(2 phi)|dxi|^2 with phi = log(2 beta / sqrt(kappa)) + (beta-1) log r - log(1 + r^(2 beta))."""
    dens = (2 * beta / sp.sqrt(kappa)) ** 2 * r ** (2 * beta - 2) / (1 + r ** (2 * beta)) ** 2
    return sp.simplify(2 * sp.pi * sp.integrate(dens * r, (r, 0, sp.oo)))


def cusp_seifert_weight() -> sp.Rational:
    """pq (1 - d/2 + sum_j beta_j/2 + beta_z/(2q) + beta_w/(2p)) for angles (1/3 at 0, 1/2 at inf, 1/2 at 1), (p, q) = (2, 3)."""
    p, q = 2, 3
    bz, bw = q * sp.Rational(1, 3), p * sp.Rational(1, 2)
    return p * q * (1 - sp.Rational(3, 2) + sp.Rational(1, 2) / 2 + bz / (2 * q) + bw / (2 * p))


def main() -> None:
    print("rugby_unit_loop(3/10) =", rugby_unit_loop(sp.Rational(3, 10)))
    print("rugby_unit_loop(3/5)  =", rugby_unit_loop(sp.Rational(3, 5)))
    for rad in (sp.Rational(1, 10), sp.Rational(1, 100), sp.Rational(1, 1000), sp.Rational(1, 10000)):
        print(f"rugby_holonomy(1/2, {rad}) =", sp.N(rugby_holonomy(sp.Rational(1, 2), rad), 17))
    print("product_volume_density(2/5, 1, 1+i) =", product_volume_density(sp.Rational(2, 5), 1, 1 + sp.I),
          "=", sp.N(product_volume_density(sp.Rational(2, 5), 1, 1 + sp.I), 17))
    print("product_volume_density(7/10, 1/2, 2-i) =",
          sp.N(product_volume_density(sp.Rational(7, 10), sp.Rational(1, 2), 2 - sp.I), 17))
    print("a3_energy(m), m=2..5 =", [a3_energy(m) for m in range(2, 6)])
    print("rugby_area(1/2, 1) =", rugby_area(sp.Rational(1, 2), 1))
    print("rugby_area(3/10, 4) =", rugby_area(sp.Rational(3, 10), 4))
    print("cusp_seifert_weight =", cusp_seifert_weight())


if __name__ == "__main__":
    main()
