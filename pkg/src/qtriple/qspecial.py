"""q-shifted factorials, q-gamma, the q-bracket and the third Jackson q-Bessel function.

All functions take real parameters.  Infinite products are truncated once the
factor ``|a q^k|`` drops below ``series_tol``; the neglected tail changes the
product by a relative amount of at most ``2 * |a q^k| / (1 - q)``.

The Bessel series cancels catastrophically for large arguments: at ``z = q^-n``
the largest term is of order ``q^-n^2`` while the value itself is of order
``q^n^2``.  Large arguments are therefore summed in multiprecision with the
argument taken as an *exact* binary float (or, for lattice points, as an exact
power of ``q``).  Perturbing a large argument by one ulp changes the value
completely, which is why solvers address lattice points by integer exponent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

__all__ = [
    "QParams",
    "QSpecialError",
    "PoleError",
    "NonConvergenceError",
    "qpochhammer",
    "qpochhammer_lattice",
    "qgamma",
    "qbracket",
    "qbessel3",
    "lattice_bessel",
    "bessel_table",
    "bessel_bound",
    "qtrig",
]


class QSpecialError(ArithmeticError):
    pass


class PoleError(QSpecialError):
    pass


class NonConvergenceError(QSpecialError):
    pass


@dataclass(frozen=True)
class QParams:
    q: float
    series_tol: float = 1e-17
    max_terms: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.series_tol <= 0:
            raise ValueError("series_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


_DEFAULT_TOL = 1e-17
_MAX_TERMS = 10_000


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")


def _is_int(x: float) -> bool:
    return float(x).is_integer()


def _pochhammer_inf(a: float, q: float, tol: float, max_terms: int) -> float:
    p = 1.0
    qk = 1.0
    for _ in range(max_terms):
        t = a * qk
        if abs(t) < tol:
            return p
        p *= 1.0 - t
        qk *= q
    raise NonConvergenceError(f"(a;q)_inf with a={a}, q={q} exceeded {max_terms} factors")


def qpochhammer(a: float, q: float, order=math.inf, *, tol: float = _DEFAULT_TOL,
                max_terms: int = _MAX_TERMS) -> float:
    """(a; q)_order for integer, infinite or real order.

    Real order uses ``(a;q)_alpha = (a;q)_inf / (a q^alpha; q)_inf``.  Negative
    integer orders follow ``(a;q)_{-n} = 1 / (a q^{-n}; q)_n``.
    """
    _check_q(q)
    if order == math.inf:
        return _pochhammer_inf(a, q, tol, max_terms)
    if _is_int(order):
        n = int(order)
        if n >= 0:
            p = 1.0
            for k in range(n):
                p *= 1.0 - a * q**k
            return p
        den = qpochhammer(a * q**n, q, -n)
        if den == 0.0:
            raise PoleError(f"(a;q)_{n} has a zero denominator for a={a}")
        return 1.0 / den
    den = _pochhammer_inf(a * q**order, q, tol, max_terms)
    if den == 0.0:
        raise PoleError(f"(a;q)_{order}: a q^order hits q^-m for a={a}, q={q}")
    return _pochhammer_inf(a, q, tol, max_terms) / den


def qpochhammer_lattice(j, q: float, order: float) -> np.ndarray:
    """(q^j; q)_order for integer exponents ``j`` (scalar or array).

    Integer exponents keep ``(1; q)_order = 0`` exact, which the fractional
    kernels rely on at their diagonal points.
    """
    _check_q(q)
    js = np.atleast_1d(np.asarray(j, dtype=np.int64))
    out = np.empty(js.shape, dtype=float)
    for i, jj in enumerate(js):
        out[i] = _poch_lattice(int(jj), float(q), float(order))
    return out if np.ndim(j) else float(out[0])


@lru_cache(maxsize=65536)
def _poch_lattice(j: int, q: float, order: float) -> float:
    if _is_int(order):
        n = int(order)
        if n >= 0:
            # factors 1 - q^(j+m), m < n; an exponent 0 gives an exact zero
            p = 1.0
            for m in range(n):
                e = j + m
                p *= 0.0 if e == 0 else 1.0 - q**e
            return p
        den = _poch_lattice(j + n, q, float(-n))
        if den == 0.0:
            raise PoleError(f"(q^{j};q)_{n} has a zero denominator")
        return 1.0 / den
    if j + order <= 0 and _is_int(j + order):
        raise PoleError(f"(q^{j};q)_{order}: denominator vanishes")
    if j <= 0:
        return 0.0
    return (_pochhammer_inf(q**j, q, _DEFAULT_TOL, _MAX_TERMS)
            / _pochhammer_inf(q ** (j + order), q, _DEFAULT_TOL, _MAX_TERMS))


def qgamma(z: float, q: float) -> float:
    """Gamma_q(z) = (q;q)_inf / (q^z;q)_inf * (1-q)^(1-z)."""
    _check_q(q)
    if z <= 0 and _is_int(z):
        raise PoleError(f"Gamma_q has a pole at z={z}")
    return (_pochhammer_inf(q, q, _DEFAULT_TOL, _MAX_TERMS)
            / _pochhammer_inf(q**z, q, _DEFAULT_TOL, _MAX_TERMS)
            * (1.0 - q) ** (1.0 - z))


def qbracket(alpha: float, k: int, q: float) -> float:
    """[alpha, k]_q = (1-q^alpha)...(1-q^(alpha-k+1)) / (q;q)_k, and 1 for k = 0."""
    _check_q(q)
    if k < 0:
        raise ValueError("k must be a nonnegative integer")
    num = 1.0
    for i in range(k):
        e = alpha - i
        num *= 0.0 if e == 0 else 1.0 - q**e
    return num / qpochhammer(q, q, k)


# ---------------------------------------------------------------- q-Bessel


def _check_order(nu: float) -> None:
    if nu < 0 and _is_int(nu):
        raise ValueError(f"integer order nu={nu} < 0 is not supported")


def _bessel_float(nu: float, z: float, qb: float, tol: float, max_terms: int) -> float:
    pref = (_pochhammer_inf(qb ** (nu + 1), qb, _DEFAULT_TOL, _MAX_TERMS)
            / _pochhammer_inf(qb, qb, _DEFAULT_TOL, _MAX_TERMS))
    z2 = z * z
    term = 1.0
    s = 1.0
    for n in range(max_terms):
        term *= -(qb ** (n + 1)) * z2 / ((1.0 - qb ** (n + 1)) * (1.0 - qb ** (nu + 1 + n)))
        s += term
        if abs(term) <= tol * abs(s):
            return pref * s * z**nu
    raise NonConvergenceError(f"J_{nu}({z}) series exceeded {max_terms} terms")


def _log10_max_term(nu: float, lz: float, lqb: float) -> float:
    # log10 of max_n q^(n(n+1)/2) z^(2n+nu), ignoring the bounded denominators
    nstar = max(0.0, -(2 * lz) / lqb - 0.5)
    best = -math.inf
    for n in {0, int(nstar), int(nstar) + 1}:
        best = max(best, n * (n + 1) / 2 * lqb + (2 * n + nu) * lz)
    return best


def _bessel_mp(nu: float, z, qb, lz: float, digits: int = 20) -> float:
    lqb = 2 * math.log10(qb.base) if callable(qb) else math.log10(qb)
    peak = _log10_max_term(nu, lz, lqb)
    # the value can be as small as the reciprocal of the peak term
    extra = int(2 * max(peak, 0.0)) + digits + 15
    with mpmath.workdps(extra):
        qb = qb() if callable(qb) else mpmath.mpf(qb)
        z = z() if callable(z) else mpmath.mpf(z)
        z2 = z * z
        # the order enters every denominator, so it must be exact in the working precision
        nu_mp = mpmath.mpf(nu)
        term = mpmath.mpf(1)
        s = mpmath.mpf(1)
        stop = -(extra + 5)
        n = 0
        while True:
            term *= -(qb ** (n + 1)) * z2 / ((1 - qb ** (n + 1)) * (1 - qb ** (nu_mp + 1 + n)))
            s += term
            n += 1
            if n * (n + 1) / 2 * lqb + 2 * n * lz < stop and n > 2:
                break
            if n > _MAX_TERMS:
                raise NonConvergenceError("multiprecision Bessel series did not converge")
        pref = mpmath.qp(qb ** (nu_mp + 1), qb) / mpmath.qp(qb, qb)
        val = pref * s * z**nu_mp
        return float(val)


def qbessel3(nu: float, z: float, qb: float, *, tol: float = 1e-17,
             max_terms: int = _MAX_TERMS) -> float:
    """Third Jackson (Hahn-Exton) q-Bessel function J_nu(z; qb), z >= 0.

    ``z`` is treated as an exact binary float.  Uses 0^0 = 1, so J_0(0) = 1.
    """
    _check_q(qb)
    _check_order(nu)
    if z < 0:
        raise ValueError("z must be nonnegative (real branch of z^nu)")
    if z == 0.0:
        if nu == 0:
            return 1.0
        if nu > 0:
            return 0.0
        raise ValueError("J_nu(0) is infinite for nu < 0")
    if z * z * qb <= 1.0:
        return _bessel_float(nu, z, qb, tol, max_terms)
    return _bessel_mp(nu, z, qb, math.log10(z))


def bessel_bound(nu: float, n: int, q: float) -> float:
    """Right-hand side of the lattice bound |J_nu(q^n; q^2)| <= ... ."""
    q2 = q * q
    c = (qpochhammer(-q2, q2) * qpochhammer(-(q ** (2 * nu + 2)), q2) / qpochhammer(q2, q2))
    if n >= 0:
        return c * q ** (n * nu)
    return c * q ** (n * n - (nu + 1) * n)


def _log10_bound(nu: float, n: int, q: float) -> float:
    c = bessel_bound(nu, 0, q)
    return math.log10(c) + (n * n - (nu + 1) * n) * math.log10(q)


@lru_cache(maxsize=200_000)
def lattice_bessel(nu: float, k: int, q: float, t: float = 1.0) -> float:
    """J_nu(t q^k; q^2) with the lattice point formed exactly from the exponent."""
    _check_q(q)
    _check_order(nu)
    nu = float(nu)
    lz = math.log10(t) + k * math.log10(q)
    if t == 1.0 and k < 0 and nu > -1:
        # below double range the bound guarantees an exact underflow
        if _log10_bound(nu, k, q) < -320:
            return 0.0
    z_float = t * q**k
    if z_float * z_float * q * q <= 1.0:
        return _bessel_float(nu, z_float, q * q, _DEFAULT_TOL, _MAX_TERMS)
    return _bessel_mp(nu, lambda: mpmath.mpf(t) * mpmath.mpf(q) ** k, _ExactSquare(q), lz)


class _ExactSquare:
    # q^2 formed in the working precision so that it matches the lattice exactly
    def __init__(self, base: float):
        self.base = base

    def __call__(self):
        return mpmath.mpf(self.base) ** 2


def bessel_table(nu: float, q: float, kmin: int, kmax: int) -> np.ndarray:
    """Array of J_nu(q^k; q^2) for k = kmin..kmax inclusive."""
    return np.array([lattice_bessel(float(nu), k, float(q)) for k in range(kmin, kmax + 1)])


def qtrig(kind: str, z: float, q: float) -> float:
    """The q-cosine and q-sine built from J_{-1/2} and J_{1/2} with base q^2."""
    _check_q(q)
    if z < 0:
        raise ValueError("z must be nonnegative")
    c = qpochhammer(q * q, q * q) / qpochhammer(q, q * q)
    if kind == "sin":
        arg = z * (1.0 - q)
        if arg == 0.0:
            return 0.0
        return c * math.sqrt(arg) * qbessel3(0.5, arg, q * q)
    if kind == "cos":
        arg = z * (1.0 - q) / math.sqrt(q)
        if arg == 0.0:
            # z^(1/2) J_{-1/2}(z) tends to the leading coefficient
            return c * qpochhammer(q, q * q) / qpochhammer(q * q, q * q)
        return c * math.sqrt(arg) * qbessel3(-0.5, arg, q * q)
    raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
