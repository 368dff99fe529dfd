"""Fractional q-operators on geometric lattices.

Every operator takes a callable ``f`` of a point (a ``LatticeFunction`` works),
an evaluation point ``x`` and the base ``q``.  Head operators sample ``f`` on
``x q^k, k >= 0``; tail operators on ``x q^-k``.  Kernel factors such as
``(q t/x; q)_{a-1}`` are evaluated from integer exponents so that the diagonal
zeros of ``(1; q)_{a-1}`` are exact.

Normalisations
--------------
``kober_calK`` with a single order uses

    calK^a f(x) = Gamma_q(a)^-1 int_x^inf t^(a-1) (x/t; q)_(a-1) f(q t) d_q t,

i.e. ``q^-a x^a calK^{-a,a}``.  With this constant the semigroup law
``calK^a calK^b = calK^(a+b)`` holds exactly and the inversion reads
``Phi(x) = -calK^(1-a)[G(./q)](x)`` with ``G = D_q calK^a Phi``.  The constant
``q^(-a(a-1)/2)`` is available as ``convention="printed"``; it breaks the
semigroup by a factor ``q^(a b)``.

``kober_I`` is the q-Erdelyi-Kober head integral

    I^{eta,a} f(x) = x^(-eta-a) / Gamma_q(a) int_0^x (q t/x; q)_(a-1) t^eta f(t) d_q t,

so that ``I^{0,a} f(x) = x^(-2a+1) I_q^a f(x)``.  The dual solver applies it
with the extra power and constant recorded in ``dualsolver``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .qlattice import DivergenceError, GUARD_BLOCK, TERM_TOL
from .qspecial import PoleError, qgamma, qpochhammer_lattice

__all__ = [
    "FracOrder",
    "frac_integral_Iq",
    "frac_derivative_Dq",
    "kober_K",
    "kober_calK",
    "kober_I",
    "MAX_TERMS",
]

MAX_TERMS = 6000


@dataclass(frozen=True)
class FracOrder:
    eta: float
    alpha: float

    def __post_init__(self):
        if self.alpha < 0 and float(self.alpha).is_integer():
            raise PoleError(f"order alpha={self.alpha} lies on the exceptional set")


def _gamma(alpha: float, q: float) -> float:
    return qgamma(alpha, q)


def _head_sum(term: Callable[[int], float], tol: float, max_terms: int,
              x: float = 1.0, q: float = 0.5) -> float:
    # term(k) for k = 0, 1, ...; stops once a block of terms is negligible or the
    # sample point x q^k would leave the normal float range
    terms = []
    run = 0.0
    quiet = 0
    depth = int(math.log(1e-290 / x) / math.log(q))
    for k in range(max_terms):
        if k > depth:
            break
        t = term(k)
        terms.append(t)
        run += abs(t)
        quiet = quiet + 1 if abs(t) <= tol * run else 0
        if quiet >= 4:
            break
    else:
        raise DivergenceError("head q-integral did not settle")
    return math.fsum(sorted(terms, key=abs))


def _tail_sum(term: Callable[[int], float], tol: float, max_terms: int) -> float:
    # term(k) for k = 1, 2, ...; guards against a growing tail
    terms = []
    run = 0.0
    quiet = 0
    rising = 0
    for k in range(1, max_terms + 1):
        t = term(k)
        if not math.isfinite(t):
            raise DivergenceError("non-finite term in tail q-integral")
        if terms and abs(t) >= abs(terms[-1]) and t != 0.0:
            rising += 1
            if rising >= GUARD_BLOCK and run > 0:
                raise DivergenceError("tail q-integral is not decaying")
        else:
            rising = 0
        terms.append(t)
        run += abs(t)
        quiet = quiet + 1 if abs(t) <= tol * run else 0
        if quiet >= 4:
            break
    else:
        raise DivergenceError("tail q-integral did not settle")
    return math.fsum(sorted(terms, key=abs))


def frac_integral_Iq(alpha: float, f, x: float, q: float, *, tol: float = TERM_TOL,
                     max_terms: int = MAX_TERMS) -> float:
    """I_q^alpha f(x) = x^(alpha-1)/Gamma_q(alpha) int_0^x (qt/x;q)_(alpha-1) f(t) d_q t."""
    if alpha <= 0 and float(alpha).is_integer():
        raise PoleError(f"Gamma_q pole at alpha={alpha}")
    if x == 0:
        raise ValueError("x must be a positive lattice point")

    def term(k):
        return q**k * qpochhammer_lattice(k + 1, q, alpha - 1) * f(x * q**k)

    s = _head_sum(term, tol, max_terms, x, q)
    return x**alpha * (1 - q) * s / _gamma(alpha, q)


def frac_derivative_Dq(alpha: float, f, x: float, q: float, **kw) -> float:
    """D_q^alpha f = I_q^(-alpha) f."""
    return frac_integral_Iq(-alpha, f, x, q, **kw)


def kober_K(order: FracOrder, f, x: float, q: float, *, tol: float = TERM_TOL,
            max_terms: int = MAX_TERMS) -> float:
    """Al-Salam's K_q^{eta,alpha}; samples f off the lattice at t q^(1-alpha)."""
    eta, alpha = order.eta, order.alpha
    shift = q ** (1 - alpha)

    def term(k):
        t = x * q**-k
        return q**-k * qpochhammer_lattice(k, q, alpha - 1) * t ** (-eta - 1) * f(t * shift)

    s = _tail_sum(term, tol, max_terms)
    return q**-eta * x**eta * x * (1 - q) * s / _gamma(alpha, q)


def _calK2(eta: float, alpha: float, f, x: float, q: float, tol, max_terms) -> float:
    def term(k):
        t = x * q**-k
        return q**-k * qpochhammer_lattice(k, q, alpha - 1) * t ** (-eta - 1) * f(q * t)

    s = _tail_sum(term, tol, max_terms)
    return q**-eta * x**eta * x * (1 - q) * s / _gamma(alpha, q)


def kober_calK(order, f, x: float, q: float, *, convention: str = "semigroup",
               tol: float = TERM_TOL, max_terms: int = MAX_TERMS) -> float:
    """The modified tail operator.

    ``order`` is a ``FracOrder`` for the two-parameter form or a real ``alpha``
    for the one-parameter form.  Order zero is the identity.
    """
    if isinstance(order, FracOrder):
        return _calK2(order.eta, order.alpha, f, x, q, tol, max_terms)
    alpha = float(order)
    if alpha == 0.0:
        return float(f(x))
    if alpha < 0 and alpha.is_integer():
        raise PoleError(f"Gamma_q pole at alpha={alpha}")
    if convention == "semigroup":
        c = 1.0
    elif convention == "printed":
        c = q ** (-alpha * (alpha - 1) / 2)
    else:
        raise ValueError("convention must be 'semigroup' or 'printed'")

    def term(k):
        t = x * q**-k
        return q**-k * t ** (alpha - 1) * qpochhammer_lattice(k, q, alpha - 1) * f(q * t)

    s = _tail_sum(term, tol, max_terms)
    return c * x * (1 - q) * s / _gamma(alpha, q)


def kober_I(order: FracOrder, f, x: float, q: float, *, tol: float = TERM_TOL,
            max_terms: int = MAX_TERMS) -> float:
    """q-Erdelyi-Kober head operator I_q^{eta,alpha}."""
    eta, alpha = order.eta, order.alpha
    if alpha == 0.0:
        return float(f(x))
    if alpha < 0 and float(alpha).is_integer():
        raise PoleError(f"Gamma_q pole at alpha={alpha}")

    def term(k):
        t = x * q**k
        return q**k * qpochhammer_lattice(k + 1, q, alpha - 1) * t**eta * f(t)

    s = _head_sum(term, tol, max_terms, x, q)
    return x ** (-eta - alpha) * x * (1 - q) * s / _gamma(alpha, q)
