"""q-Hankel transform and closed-form Bessel integrals on the lattice q^k.

The transform is normalised to be its own inverse:

    g(lam) = (1-q)^-1 int_0^inf x f(x) J_nu(lam x; q^2) d_q x,

which follows from the lattice orthogonality
``sum_k q^2k J_nu(q^(k+n)) J_nu(q^(k+m)) = q^-2n delta_nm``.  Without the
``(1-q)^-1`` the double transform returns ``(1-q)^2 f``.

All points are addressed by integer exponents (``x = q^k``) so that every
Bessel argument is an exact power of ``q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qlattice import LatticeFunction, QLattice, DomainError
from .qspecial import lattice_bessel, qgamma, qpochhammer_lattice

__all__ = [
    "HankelSpec",
    "ParameterError",
    "WindowError",
    "hankel",
    "bessel_integral_closed_form",
    "bessel_integral_sum",
    "corollary_head",
    "corollary_tail",
    "KINDS",
]

KINDS = ("prod_two_orders", "tail_kober", "head_window", "tail_window")


class ParameterError(ValueError):
    pass


class WindowError(ArithmeticError):
    pass


@dataclass(frozen=True)
class HankelSpec:
    nu: float
    lat: QLattice

    def __post_init__(self):
        if not self.nu > -1:
            raise ParameterError(f"nu must exceed -1, got {self.nu}")
        if self.lat.t != 1.0:
            raise ParameterError("the transform pair lives on the lattice q^k (t = 1)")
        if self.lat.n_neg < 1 or self.lat.n_pos < 1:
            raise ParameterError("the lattice must span both slices")


def hankel(spec: HankelSpec, f, *, energy_tol: float = 1e-3) -> LatticeFunction:
    """Normalised q-Hankel transform tabulated on ``spec.lat``.

    ``f`` is a tabulated ``LatticeFunction`` on the same lattice or a callable
    of the point.  A window error is raised when the energy of ``f`` outside
    the window edges is not negligible.
    """
    lat = spec.lat
    q = lat.q
    ks = lat.exponents
    if isinstance(f, LatticeFunction) and f.table is not None:
        vals = np.array([f.table.get(int(k), 0.0) for k in ks])
    else:
        vals = np.array([float(f(q ** float(k))) for k in ks])
    if not np.all(np.isfinite(vals)):
        raise WindowError("non-finite input values")
    w = q ** (2.0 * ks) * vals**2
    total = w.sum()
    if total > 0:
        edge = w[:2].sum() + w[-2:].sum()
        if edge > energy_tol * total:
            raise WindowError("input energy reaches the window edge")
    xs_weight = q ** (2.0 * ks) * vals  # x * (1-q) x * f / (1-q)
    out = []
    for i in ks:
        terms = [xs_weight[n] * lattice_bessel(spec.nu, int(i + k), q)
                 for n, k in enumerate(ks) if vals[n] != 0.0]
        out.append(math.fsum(sorted(terms, key=abs)))
    return LatticeFunction.from_values(lat, ks, out, decay="super")


# ------------------------------------------------------- closed-form integrals


def _gq2(z, q):
    return qgamma(z, q * q)


def bessel_integral_closed_form(kind: str, *, q: float, printed: bool = False, **p) -> float:
    """Right-hand sides of the lattice Bessel integral identities.

    Points are integer exponents of ``q``.

    ``prod_two_orders``: alpha, beta, xi, rho
        int_0^inf t^(alpha-beta+1) J_alpha(xi t) J_beta(rho t) d_q t
    ``head_window``: nu, gamma, x, u
        int_0^x rho^(nu+1) (q^2 rho^2/x^2; q^2)_gamma J_nu(u rho) d_q rho
    ``tail_window`` / ``tail_kober``: nu, gamma (or alpha), x (or rho), u
        int_x^inf rho^(2gamma-nu-1) (x^2/rho^2; q^2)_(gamma-1) J_nu(u rho) d_q rho

    The tail identity carries ``q^(nu-gamma)``; ``printed=True`` returns the
    variant with ``q^gamma`` for comparison.
    """
    Q = q * q
    if kind == "prod_two_orders":
        a, b, xi, rho = p["alpha"], p["beta"], int(p["xi"]), int(p["rho"])
        if not b > a > -1:
            raise ParameterError("need beta > alpha > -1")
        X, R = q**xi, q**rho
        if xi < rho:  # xi > rho as points
            return 0.0
        return ((1 - q) * (1 - Q) ** (1 - b + a) / _gq2(b - a, q) * X**a * R ** (b - 2 * a - 2)
                * qpochhammer_lattice(xi - rho + 1, Q, b - a - 1))
    if kind == "head_window":
        nu, g, x, u = p["nu"], p["gamma"], int(p["x"]), int(p["u"])
        if not (g > -1 and nu > -1):
            raise ParameterError("need gamma > -1 and nu > -1")
        X, U = q**x, q**u
        return (X ** (nu - g + 1) * U ** (-g - 1) * (1 - q) * (1 - Q) ** g * _gq2(g + 1, q)
                * lattice_bessel(g + nu + 1, u + x, q))
    if kind in ("tail_window", "tail_kober"):
        nu = p["nu"]
        g = p["gamma"] if "gamma" in p else p["alpha"]
        x = int(p["x"] if "x" in p else p["rho"])
        u = int(p["u"])
        if not (g > 0 and nu > -1):
            raise ParameterError("need gamma > 0 and nu > -1")
        X, U = q**x, q**u
        qpow = q**g if printed else q ** (nu - g)
        return ((1 - q) * _gq2(g, q) * (1 - Q) ** (g - 1) * X ** (g - nu) * U**-g * qpow
                * lattice_bessel(nu - g, u + x - 1, q))
    raise ParameterError(f"unknown kind {kind!r}")


def _fsum(terms):
    return math.fsum(sorted(terms, key=abs))


def _done(q, terms, return_scale):
    val = (1 - q) * _fsum(terms)
    if return_scale:
        return val, (1 - q) * math.fsum(abs(t) for t in terms)
    return val


def bessel_integral_sum(kind: str, *, q: float, tol: float = 1e-17, max_terms: int = 4000,
                        return_scale: bool = False, **p):
    """Left-hand sides of the identities by direct Jackson summation.

    With ``return_scale`` the sum of absolute terms is returned as well; it
    bounds the rounding error of the value, which matters when large-argument
    Bessel factors make the terms cancel.
    """
    Q = q * q
    if kind == "prod_two_orders":
        a, b, xi, rho = p["alpha"], p["beta"], int(p["xi"]), int(p["rho"])
        terms = []
        run = 0.0
        # large t: the Bessel factors vanish on the lattice; small t: geometric decay
        for k in range(-max(xi, rho) - 40, max_terms):
            t = q**k
            v = t ** (a - b + 2) * lattice_bessel(a, xi + k, q) * lattice_bessel(b, rho + k, q)
            terms.append(v)
            run += abs(v)
            if k > 10 and abs(v) <= tol * run:
                break
        return _done(q, terms, return_scale)
    if kind == "head_window":
        nu, g, x, u = p["nu"], p["gamma"], int(p["x"]), int(p["u"])
        X = q**x
        terms = []
        run = 0.0
        for k in range(max_terms):
            r = X * q**k
            t = r * r ** (nu + 1) * qpochhammer_lattice(k + 1, Q, g) * lattice_bessel(nu, u + x + k, q)
            terms.append(t)
            run += abs(t)
            if k > 10 and abs(t) <= tol * run:
                break
        return _done(q, terms, return_scale)
    if kind in ("tail_window", "tail_kober"):
        nu = p["nu"]
        g = p["gamma"] if "gamma" in p else p["alpha"]
        x = int(p["x"] if "x" in p else p["rho"])
        u = int(p["u"])
        terms = []
        for k in range(1, max_terms):
            r = q ** (x - k)
            j = lattice_bessel(nu, u + x - k, q)
            if j == 0.0 and k > 5:
                break
            terms.append(r * r ** (2 * g - nu - 1) * qpochhammer_lattice(k, Q, g - 1) * j)
        return _done(q, terms, return_scale)
    raise ParameterError(f"unknown kind {kind!r}")


def corollary_head(nu: float, alpha: float, x: int, u: int, q: float) -> tuple[float, float]:
    """Both sides of u^alpha J_(nu-alpha)(ux) = c x^(alpha-nu-1) D_q[x^-2alpha int_0^x ...].

    Returns (left, right) with the right side built from Jackson sums and one
    q-difference.
    """
    Q = q * q

    def inner(xe):
        X = q**xe
        s = bessel_integral_sum("head_window", q=q, nu=nu, gamma=-alpha, x=xe, u=u)
        return X ** (-2 * alpha) * s

    X = q**x
    d = (inner(x) - inner(x + 1)) / (X * (1 - q))
    right = (1 - Q) ** alpha * X ** (alpha - nu - 1) / _gq2(1 - alpha, q) * d
    left = (q**u) ** alpha * lattice_bessel(nu - alpha, u + x, q)
    return left, right


def corollary_tail(nu: float, alpha: float, x: int, u: int, q: float, *,
                   printed: bool = False) -> tuple[float, float]:
    """Both sides of u^alpha J_(nu+alpha)(ux) = -c x^(alpha+nu-1) D_q int_x^inf ... .

    The constant carries no power of q; ``printed=True`` multiplies it by
    ``q^(2 alpha + nu - 2)`` for comparison.
    """
    Q = q * q

    def inner(xe):
        return bessel_integral_sum("tail_window", q=q, nu=nu, gamma=1 - alpha, x=xe, u=u)

    X = q**x
    d = (inner(x) - inner(x + 1)) / (X * (1 - q))
    c = (1 - Q) ** alpha / _gq2(1 - alpha, q)
    if printed:
        c *= q ** (2 * alpha + nu - 2)
    right = -c * X ** (alpha + nu - 1) * d
    left = (q**u) ** alpha * lattice_bessel(nu + alpha, u + x, q)
    return left, right
