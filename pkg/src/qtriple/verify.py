"""The lattice identity suite: Bessel relations, Bessel integrals, fractional operators.

Each identity is evaluated on a parameter grid and reported as the largest
error relative to ``max(|closed form|, sum of |terms|)``.  The second scale
matters only where large-argument Bessel factors make the direct sum cancel;
there no float summation can do better than ``eps * sum|terms|``.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

from .qfrac import frac_derivative_Dq, frac_integral_Iq, kober_calK
from .qhankel import (bessel_integral_closed_form, bessel_integral_sum, corollary_head,
                      corollary_tail)
from .qlattice import q_derivative
from .qspecial import bessel_bound, lattice_bessel, qgamma

__all__ = ["IdentityResult", "identity_suite", "QS", "ORDERS", "FRAC_ORDERS"]

QS = (0.3, 0.5, 0.7)
ORDERS = (0.25, 0.5, 1.5, 2.5)
FRAC_ORDERS = (0.25, 0.5, 0.75)
POINTS = tuple(itertools.product((-1, 0, 2), (-1, 0, 1)))  # nine (x, u) exponent pairs


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_err: float
    checks: int
    seconds: float

    def ok(self, tol: float = 1e-8) -> bool:
        return self.max_err <= tol


def _err(left, right, scale=0.0):
    return abs(left - right) / max(abs(right), abs(scale), 1e-300)


def _neg_int(x):
    return x < 0 and float(x).is_integer()


def _relation_a(q):
    for nu, k in itertools.product(ORDERS, range(-4, 5)):
        z = q**k
        a = z**-nu * lattice_bessel(nu, k, q)
        b = (q * z) ** -nu * lattice_bessel(nu, k + 1, q)
        left = (a - b) / (z * (1 - q))
        right = -(q ** (1 - nu)) * z**-nu / (1 - q) * lattice_bessel(nu + 1, k + 1, q)
        yield _err(left, right)


def _relation_b(q):
    for nu, k in itertools.product(ORDERS, range(-4, 5)):
        z = q**k
        a = z**nu * lattice_bessel(nu, k, q)
        b = (q * z) ** nu * lattice_bessel(nu, k + 1, q)
        left = (a - b) / (z * (1 - q))
        right = z**nu / (1 - q) * lattice_bessel(nu - 1, k, q)
        yield _err(left, right)


def _bound_c(q):
    for nu, n in itertools.product(ORDERS, range(-4, 9)):
        yield max(0.0, abs(lattice_bessel(nu, n, q)) / bessel_bound(nu, n, q) - 1.0)


def _integral(kind, grid):
    def run(q):
        for params in grid:
            left, scale = bessel_integral_sum(kind, q=q, return_scale=True, **params)
            right = bessel_integral_closed_form(kind, q=q, **params)
            yield _err(left, right, scale)
    return run


def _prop21_grid():
    for a, b in itertools.product(ORDERS, ORDERS):
        if b > a:
            for xi, rho in POINTS:
                yield dict(alpha=a, beta=b, xi=xi, rho=rho)


def _tail_grid(name):
    for nu, g in itertools.product(ORDERS, ORDERS):
        if not _neg_int(nu - g):
            for x, u in POINTS:
                yield {"nu": nu, name: g, ("rho" if name == "alpha" else "x"): x, "u": u}


def _head_grid():
    for nu, g in itertools.product(ORDERS, (0.0,) + ORDERS):
        for x, u in POINTS:
            yield dict(nu=nu, gamma=g, x=x, u=u)


def _corollary(fn):
    def run(q):
        for nu, al in itertools.product(ORDERS, FRAC_ORDERS):
            if _neg_int(nu - al):
                continue
            for x, u in POINTS:
                left, right = fn(nu, al, x, u, q)
                yield _err(right, left)
    return run


def _abel(q):
    funcs = []
    for al in FRAC_ORDERS:
        funcs.append((al, lambda t: t**0.3 + 1.0))
        funcs.append((al, lambda t: t * t + 2.0 * math.sqrt(t)))
    for al, f in funcs:
        boundary = _abel_boundary(al, f, q)
        for k in range(0, 9):
            x = q**k
            left = frac_integral_Iq(al, lambda t: frac_derivative_Dq(al, f, t, q), x, q)
            right = f(x) - boundary * x ** (al - 1.0)
            yield _err(left, right)


def _abel_boundary(al, f, q):
    # I_q^(1-al) f(0) / Gamma_q(al), the limit read off near 1e-200 on the lattice
    n = int(math.log(1e-200) / math.log(q))
    return frac_integral_Iq(1.0 - al, f, q**n, q) / qgamma(al, q)


_TEST_FUNCS = (lambda t: t**-2.0, lambda t: t**-3.0, lambda t: 1.0 / (t * t * (1.0 + t)))


def _semigroup(q):
    for (a, b), phi in itertools.product(itertools.product((0.3, 0.4, 0.5), repeat=2), _TEST_FUNCS):
        for k in range(0, 9):
            x = q**-k
            left = kober_calK(a, lambda s: kober_calK(b, phi, s, q), x, q)
            right = kober_calK(a + b, phi, x, q)
            yield _err(left, right)


def _inversion(q):
    for al in FRAC_ORDERS:
        def G(x, al=al):
            return q_derivative(lambda s: kober_calK(al, lambda t: t**-2.0, s, q), x, q)
        for k in range(1, 10):
            x = q**-k
            left = -kober_calK(1.0 - al, lambda s: G(s / q), x, q)
            yield _err(left, x**-2.0)


IDENTITIES = {
    "relation (a)": _relation_a,
    "relation (b)": _relation_b,
    "bound (c)": _bound_c,
    "discontinuous integral": _integral("prod_two_orders", list(_prop21_grid())),
    "tail Kober integral": _integral("tail_kober", list(_tail_grid("alpha"))),
    "head window integral": _integral("head_window", list(_head_grid())),
    "tail window integral": _integral("tail_window", list(_tail_grid("gamma"))),
    "head corollary": _corollary(corollary_head),
    "tail corollary": _corollary(corollary_tail),
    "Abel identity": _abel,
    "calK semigroup": _semigroup,
    "calK inversion": _inversion,
}


def identity_suite(qs=QS, names=None) -> list[IdentityResult]:
    out = []
    for name, gen in IDENTITIES.items():
        if names is not None and name not in names:
            continue
        t0 = time.perf_counter()
        errs = [e for q in qs for e in gen(q)]
        out.append(IdentityResult(name, max(errs), len(errs), time.perf_counter() - t0))
    return out
