"""Triple q-integral equations with a weight w, solved through two coupled Fredholm equations.

    int_0^inf psi(u) J_nu(u rho; q^2) d_q u                    = f1(rho),  rho in A_{q,a}
    int_0^inf u^-2alpha psi(u) (1 + w(u)) J_nu(u rho; q^2) d_q u = f2(rho),  a < rho <= b
    int_0^inf psi(u) J_nu(u rho; q^2) d_q u                    = f3(rho),  rho in B_{q,b}

With ``C = u^-2alpha psi (1+w) = C1 + C2`` the two halves are

    C1(u) = (1-q)^-2 u^(1-alpha) int_0^inf x P1(x) J_(nu-alpha)(ux) d_q x,  P1 = Phi1 on A_b, psi1 on B_b
    C2(u) = (1-q)^-2 u^(1-alpha) int_0^inf x P2(x) J_(nu+alpha)(ux) d_q x,  P2 = psi2 on A_a, Phi2 on B_a

(the factor (1-q)^-2 makes the Hankel pair an exact inverse on the lattice).
Phi1 and Phi2 come from the split g1 + g2 = f2 in closed form; psi1, psi2 solve

    psi1 = T1[f3] + (1-q)^-2 [ int_B_b x psi1 K1 + int_A_b x Phi1 K1 - int_A_a x psi2 X - int_B_a x Phi2 X ]
    psi2 = T2[f1] + (1-q)^-2 [ int_A_a x psi2 K2 + int_B_a x Phi2 K2 - int_A_b x Phi1 X' - int_B_b x psi1 X' ]

    K1(r, x) = int u w/(1+w) J_(nu-alpha)(ux) J_(nu-alpha)(ur) d_q u
    K2(r, x) = int u w/(1+w) J_(nu+alpha)(ux) J_(nu+alpha)(ur) d_q u
    X(r, x)  = int u/(1+w) J_(nu+alpha)(ux) J_(nu-alpha)(ur) d_q u,   X'(r, x) = X(x, r)

    T1[h](r) = c1 r^(nu-alpha) (1+q)(1-q^2)^-alpha / Gamma_{q^2}(alpha) int_r^inf x^(2alpha-nu-1) (r^2/x^2; q^2)_(alpha-1) h(qx) d_q x
    T2[h](r) = r^(alpha-nu-2) (1+q)(1-q^2)^-alpha / Gamma_{q^2}(alpha) int_0^r x^(nu+1) (q^2x^2/r^2; q^2)_(alpha-1) h(x) d_q x

with ``c1 = q^(2alpha-nu)``.  Two other constants for the first equation are
kept as variants ("statement", "proof"); a manufactured solution decides.

Every point is ``q^k`` with an integer exponent; ``a = q^m_a`` and ``b = q^m_b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from .qlattice import LatticeFunction, QLattice
from .qspecial import _log10_bound, lattice_bessel, qgamma, qpochhammer_lattice

__all__ = [
    "VARIANTS",
    "TripleError",
    "ConditioningError",
    "WindowError",
    "TripleProblem",
    "FredholmSystem",
    "SolveReport",
    "split_middle",
    "compute_phi1",
    "compute_phi1_fractional",
    "compute_phi2",
    "compute_phi2_kober",
    "kernel_K1",
    "kernel_K2",
    "kernel_X",
    "rhs_F",
    "assemble",
    "assemble_and_solve",
    "triple_residual",
    "manufactured_problem",
    "audit_variants",
    "example2_problem",
    "example2_relations",
    "check_window",
]

# (q-power on the T1 term, rho-exponent shift, q-power on the bracket, sign of the Phi1 K1 term)
VARIANTS = {
    "derived": lambda al, nu: (2 * al - nu, nu - al, 0.0, +1.0),
    "statement": lambda al, nu: (-2 * al * al - al + nu, nu - al, -2 * al * al - al + nu, -1.0),
    "proof": lambda al, nu: (nu - 4 * al, nu + al, nu - 4 * al, -1.0),
}

COND_LIMIT = 1e12


class TripleError(ValueError):
    pass


class ConditioningError(ArithmeticError):
    pass


class WindowError(ArithmeticError):
    pass


def _zero(x):
    return 0.0


def exponent(x: float, q: float) -> int:
    """Integer exponent of a lattice point q^k."""
    k = round(math.log(x) / math.log(q))
    if abs(q**k - x) > 1e-9 * x:
        raise TripleError(f"{x} is not a point q^k of the lattice")
    return k


@dataclass(frozen=True)
class TripleProblem:
    q: float
    m_a: int
    m_b: int
    alpha: float
    nu: float
    w: Callable = _zero
    f1: Callable = _zero
    f2: Callable = _zero
    f3: Callable = _zero
    g1: Callable | None = None
    g2: Callable | None = None
    t_check: float | None = None
    M: int = 40
    N: int = 40
    n_phi: int | None = None
    variant: str = "derived"
    w_max: float | None = None

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise TripleError("q must lie in (0, 1)")
        if not 0 < self.alpha < 1:
            raise TripleError(f"need 0 < alpha < 1, got alpha = {self.alpha}")
        if not self.nu > -1:
            raise TripleError(f"need nu > -1, got nu = {self.nu}")
        if not self.nu + self.alpha > 0:
            raise TripleError("need nu + alpha > 0")
        if not self.m_a > self.m_b:
            raise TripleError("need m_a > m_b so that 0 < a < b")
        if self.M < 1 or self.N < 1:
            raise TripleError("M and N must be positive")
        if self.variant not in VARIANTS:
            raise TripleError(f"variant must be one of {sorted(VARIANTS)}")
        if self.t_check is not None:
            lo, hi = -self.nu + 2 * (1 - self.alpha), self.nu + 2
            if not hi > self.t_check > lo:
                raise TripleError(f"need nu + 2 > t > -nu + 2(1 - alpha), i.e. {hi} > t > {lo}")
        if (self.g1 is None) != (self.g2 is None):
            raise TripleError("give both g1 and g2 or neither")
        for k in self.u_exponents:
            wv = self.w(self.q ** float(k))
            if not (math.isfinite(wv) and wv >= 0):
                raise TripleError(f"w must be finite and nonnegative, w({self.q**float(k)}) = {wv}")
        if self.g1 is not None:
            for k in self.band:
                x = self.q**k
                if self.g1(x) + self.g2(x) != self.f2(x):
                    raise TripleError(f"g1 + g2 differs from f2 at the band point {x}")

    @property
    def a(self) -> float:
        return self.q**self.m_a

    @property
    def b(self) -> float:
        return self.q**self.m_b

    @property
    def band(self) -> range:
        return range(self.m_b, self.m_a)

    @property
    def grid1(self) -> np.ndarray:
        # psi1 on B_b, nearest point first
        return np.arange(self.m_b - 1, self.m_b - 1 - self.M, -1)

    @property
    def grid2(self) -> np.ndarray:
        return np.arange(self.m_a, self.m_a + self.N)

    @property
    def phi1_grid(self) -> np.ndarray:
        return np.arange(self.m_b, self.m_b + self.n_phi_eff)

    @property
    def phi2_grid(self) -> np.ndarray:
        return np.arange(self.m_a - 1, self.m_a - 1 - self.n_phi_eff, -1)

    @cached_property
    def cut(self) -> int:
        """Bessel factors J(q^-n) with n beyond this are below 1e-18 of their scale."""
        order = max(self.nu + self.alpha, abs(self.nu - self.alpha), self.nu)
        n = 1
        while _log10_bound(order, -n, self.q) > -18:
            n += 1
        return n

    @cached_property
    def n_phi_eff(self) -> int:
        # Phi1 must reach well below the psi2 grid so that C1 is clean on the u-window
        if self.n_phi is not None:
            return self.n_phi
        return self.N + (self.m_a - self.m_b) + self.cut + 40

    @cached_property
    def u_exponents(self) -> np.ndarray:
        q = self.q
        lo = -(self.m_a + self.N - 1 + self.cut)
        p = max(0.25, 1 + min(self.nu - self.alpha, 0))
        hi = (max(self.M - self.m_b, self.n_phi_eff - self.m_a, 0)
              + math.ceil(18 / (-math.log10(q) * p)))
        return np.arange(lo, hi + 1)

    def split(self) -> tuple[Callable, Callable]:
        if self.g1 is None:
            return split_middle(self, "head_all")
        return self.g1, self.g2


def split_middle(p: TripleProblem, policy: str = "head_all", g1=None, g2=None):
    """Split f2 into g1 on A_b and g2 on B_a with g1 + g2 = f2 on the band."""
    q = p.q

    def in_band(x):
        k = round(math.log(x) / math.log(q))
        return p.m_b <= k < p.m_a

    if policy == "head_all":
        return (lambda x: p.f2(x) if in_band(x) else 0.0), _zero
    if policy == "tail_all":
        return _zero, (lambda x: p.f2(x) if in_band(x) else 0.0)
    if policy == "user":
        if g1 is None or g2 is None:
            raise TripleError("the user policy needs g1 and g2")
        for k in p.band:
            x = q**k
            if g1(x) + g2(x) != p.f2(x):
                raise TripleError(f"g1 + g2 differs from f2 at the band point {x}")
        return g1, g2
    raise TripleError(f"unknown split policy {policy!r}")


# ---------------------------------------------------------------- Phi1, Phi2


def _head(p: TripleProblem, g, k: int, tol=1e-17, max_terms=4000) -> float:
    # x^-2alpha int_0^x g(r) r^(nu+1) (q^2 r^2/x^2; q^2)_(-alpha) d_q r at x = q^k
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    x = q**k
    terms = []
    run = 0.0
    for j in range(max_terms):
        r = q ** (k + j)
        if r < 1e-300:
            break
        t = q**j * g(r) * r ** (nu + 1) * qpochhammer_lattice(j + 1, Q, -al)
        terms.append(t)
        run += abs(t)
        if j > 8 and abs(t) <= tol * run:
            break
    return x ** (-2 * al) * x * (1 - q) * math.fsum(sorted(terms, key=abs))


def compute_phi1(p: TripleProblem, k: int, g1=None) -> float:
    """Phi1 at x = q^k on A_b from the q-derivative of a head integral."""
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    g1 = g1 if g1 is not None else p.split()[0]
    x = q**k
    d = (_head(p, g1, k) - _head(p, g1, k + 1)) / (x * (1 - q))
    return (1 - Q) ** al * x ** (al - nu - 1) / qgamma(1 - al, Q) * d


def compute_phi1_fractional(p: TripleProblem, k: int, g1=None, *, printed: bool = False) -> float:
    """Phi1 through the fractional q^2-derivative of t^(nu/2) g1(sqrt t).

    The derivative acts in the variable t = x^2 and the power is x^(alpha-nu).
    ``printed=True`` evaluates it at x with the power x^(alpha-nu-1) instead.
    """
    from .qfrac import frac_derivative_Dq
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    g1 = g1 if g1 is not None else p.split()[0]
    x = q**k
    s, power = (x, al - nu - 1) if printed else (x * x, al - nu)
    val = frac_derivative_Dq(al, lambda t: t ** (nu / 2) * g1(math.sqrt(t)), s, Q)
    return (1 - Q) ** al * x**power * val


def _tail(p: TripleProblem, g, k: int, tol=1e-17, max_terms=4000) -> float:
    # int_x^inf g(r) r^(1-2alpha-nu) (x^2/r^2; q^2)_(-alpha) d_q r at x = q^k
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    x = q**k
    terms = []
    run = 0.0
    for j in range(1, max_terms):
        r = q ** (k - j)
        t = q**-j * g(r) * r ** (1 - 2 * al - nu) * qpochhammer_lattice(j, Q, -al)
        terms.append(t)
        run += abs(t)
        if j > 8 and abs(t) <= tol * run:
            break
        if r > 1e300:
            break
    return x * (1 - q) * math.fsum(sorted(terms, key=abs))


def compute_phi2(p: TripleProblem, k: int, g2=None, *, printed: bool = False) -> float:
    """Phi2 at x = q^k on B_a from the q-derivative of a tail integral.

    ``printed=True`` includes the factor q^(2alpha+nu-2) for comparison.
    """
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    g2 = g2 if g2 is not None else p.split()[1]
    x = q**k
    d = (_tail(p, g2, k) - _tail(p, g2, k + 1)) / (x * (1 - q))
    c = -((1 - Q) ** al) / qgamma(1 - al, Q)
    if printed:
        c *= q ** (2 * al + nu - 2)
    return c * x ** (al + nu - 1) * d


def compute_phi2_kober(p: TripleProblem, k: int, g2=None, *, printed: bool = False) -> float:
    """Phi2 through D_{q^2} calK_{q^2}^(1-alpha)[t^(-nu/2) g2(sqrt t)].

    Derived form: ``-(1-q^2)^alpha q^(-2alpha) x^(alpha+nu) (D calK[..])(x^2/q^2)``
    with calK in its semigroup normalisation.  ``printed=True`` uses
    ``-q^(alpha(1-alpha)/2) (1-q^2)^alpha x^(alpha+nu-1) (D calK[..])(x/q^2)``
    with the other calK constant.
    """
    from .qfrac import kober_calK
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    g2 = g2 if g2 is not None else p.split()[1]
    x = q**k
    conv = "printed" if printed else "semigroup"

    def F(t):
        return t ** (-nu / 2) * g2(math.sqrt(t))

    def K(y):
        return kober_calK(1 - al, F, y, Q, convention=conv)

    s = x / Q if printed else x * x / Q
    d = (K(s) - K(Q * s)) / (s * (1 - Q))
    if printed:
        return -(q ** (al * (1 - al) / 2)) * (1 - Q) ** al * x ** (al + nu - 1) * d
    return -((1 - Q) ** al) * Q**-al * x ** (al + nu) * d


# ---------------------------------------------------------------- kernels


class _Tables:
    """Bessel rows J_order(q^(k + e)) over the u-window for a set of exponents e."""

    def __init__(self, p: TripleProblem):
        self.p = p
        self.ks = p.u_exponents
        q = p.q
        u = q ** self.ks.astype(float)
        wv = np.array([p.w(x) for x in u])
        self.u = u
        self.w = wv
        self.meas = (1 - q) * u * u  # u d_q u
        self._rows = {}

    def rows(self, order: float, exps) -> np.ndarray:
        key = (order, tuple(int(e) for e in exps))
        if key not in self._rows:
            q = self.p.q
            self._rows[key] = np.array(
                [[lattice_bessel(order, int(k + e), q) for k in self.ks] for e in exps]).reshape(
                len(exps), len(self.ks))
        return self._rows[key]


def _kernel(tab: _Tables, order_r, rexps, order_x, xexps, weight) -> np.ndarray:
    R = tab.rows(order_r, rexps)
    X = tab.rows(order_x, xexps)
    prod = R[:, None, :] * X[None, :, :] * weight[None, None, :]
    return np.sum(prod, axis=2)


def kernel_K1(p: TripleProblem, r: int, x: int) -> float:
    tab = _Tables(p)
    om = tab.meas * tab.w / (1 + tab.w)
    return float(_kernel(tab, p.nu - p.alpha, [r], p.nu - p.alpha, [x], om)[0, 0])


def kernel_K2(p: TripleProblem, r: int, x: int) -> float:
    tab = _Tables(p)
    om = tab.meas * tab.w / (1 + tab.w)
    return float(_kernel(tab, p.nu + p.alpha, [r], p.nu + p.alpha, [x], om)[0, 0])


def kernel_X(p: TripleProblem, r: int, x: int) -> float:
    """X(r, x) = int u/(1+w) J_(nu+alpha)(ux) J_(nu-alpha)(ur) d_q u."""
    tab = _Tables(p)
    om = tab.meas / (1 + tab.w)
    return float(_kernel(tab, p.nu - p.alpha, [r], p.nu + p.alpha, [x], om)[0, 0])


# ---------------------------------------------------------------- right sides


def _T1(p: TripleProblem, f3, k: int, cT: float, shift: float, tol=1e-17, max_terms=4000) -> float:
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    r = q**k
    terms = []
    run = 0.0
    for j in range(1, max_terms):
        x = q ** (k - j)
        t = q**-j * x ** (2 * al - nu - 1) * qpochhammer_lattice(j, Q, al - 1) * f3(q * x)
        terms.append(t)
        run += abs(t)
        if (j > 8 and abs(t) <= tol * run) or x > 1e300:
            break
    s = r * (1 - q) * math.fsum(sorted(terms, key=abs))
    return q**cT * r**shift * (1 + q) * (1 - Q) ** -al / qgamma(al, Q) * s


def _T2(p: TripleProblem, f1, k: int, tol=1e-17, max_terms=4000) -> float:
    q, Q, al, nu = p.q, p.q * p.q, p.alpha, p.nu
    r = q**k
    terms = []
    run = 0.0
    for j in range(max_terms):
        x = q ** (k + j)
        if x < 1e-300:
            break
        t = q**j * x ** (nu + 1) * qpochhammer_lattice(j + 1, Q, al - 1) * f1(x)
        terms.append(t)
        run += abs(t)
        if j > 8 and abs(t) <= tol * run:
            break
    s = r * (1 - q) * math.fsum(sorted(terms, key=abs))
    return r ** (al - nu - 2) * (1 + q) * (1 - Q) ** -al / qgamma(al, Q) * s


@dataclass
class FredholmSystem:
    grid1: np.ndarray
    grid2: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    X12: np.ndarray
    X21: np.ndarray
    F1vec: np.ndarray
    F2vec: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    variant: str
    matrix: np.ndarray = field(repr=False, default=None)


def _weights(q, exps):
    x = q ** exps.astype(float)
    return (1 - q) * x * x  # x d_q x


def assemble(p: TripleProblem) -> FredholmSystem:
    q, al, nu = p.q, p.alpha, p.nu
    cT, shift, cK, sgn = VARIANTS[p.variant](al, nu)
    g1, g2 = p.split()
    g1_zero = all(g1(q**float(k)) == 0.0 for k in p.phi1_grid)
    g2_zero = all(g2(q**float(k)) == 0.0 for k in p.phi2_grid)
    phi1 = np.zeros(len(p.phi1_grid)) if g1_zero else np.array(
        [compute_phi1(p, int(k), g1) for k in p.phi1_grid])
    phi2 = np.zeros(len(p.phi2_grid)) if g2_zero else np.array(
        [compute_phi2(p, int(k), g2) for k in p.phi2_grid])

    tab = _Tables(p)
    om_w = tab.meas * tab.w / (1 + tab.w)
    om_1 = tab.meas / (1 + tab.w)
    lo, hi = nu - al, nu + al
    g1x, g2x, p1x, p2x = p.grid1, p.grid2, p.phi1_grid, p.phi2_grid
    K1 = _kernel(tab, lo, g1x, lo, g1x, om_w)
    K2 = _kernel(tab, hi, g2x, hi, g2x, om_w)
    X12 = _kernel(tab, lo, g1x, hi, g2x, om_1)       # X(rho in B_b, x in A_a)
    X21 = _kernel(tab, hi, g2x, lo, g1x, om_1)       # X'(rho in A_a, x in B_b)
    K1phi = _kernel(tab, lo, g1x, lo, p1x, om_w)
    Xphi2 = _kernel(tab, lo, g1x, hi, p2x, om_1)
    K2phi = _kernel(tab, hi, g2x, hi, p2x, om_w)
    Xphi1 = _kernel(tab, hi, g2x, lo, p1x, om_1)

    W1 = _weights(q, g1x)
    W2 = _weights(q, g2x)
    Wp1 = _weights(q, p1x)
    Wp2 = _weights(q, p2x)
    c1 = q**cK / (1 - q) ** 2
    c2 = 1.0 / (1 - q) ** 2

    F1 = np.array([_T1(p, p.f3, int(k), cT, shift) for k in g1x])
    F1 = F1 + c1 * (sgn * K1phi @ (Wp1 * phi1) - Xphi2 @ (Wp2 * phi2))
    F2 = np.array([_T2(p, p.f1, int(k)) for k in g2x])
    F2 = F2 + c2 * (K2phi @ (Wp2 * phi2) - Xphi1 @ (Wp1 * phi1))

    A = np.block([
        [np.eye(p.M) - c1 * K1 * W1[None, :], c1 * X12 * W2[None, :]],
        [c2 * X21 * W1[None, :], np.eye(p.N) - c2 * K2 * W2[None, :]],
    ])
    return FredholmSystem(g1x, g2x, K1, K2, X12, X21, F1, F2, W1, W2, phi1, phi2, p.variant, A)


@dataclass
class SolveReport:
    psi1: LatticeFunction
    psi2: LatticeFunction
    C1: LatticeFunction
    C2: LatticeFunction
    psi: LatticeFunction
    phi1: LatticeFunction
    phi2: LatticeFunction
    cond: float
    truncation: dict
    variant: str
    residuals: dict = field(default_factory=dict)


def rhs_F(p: TripleProblem, which: str, k: int) -> float:
    """Entry of F1 (k in the psi1 grid) or F2 (k in the psi2 grid)."""
    sysm = assemble(p)
    if which == "F1":
        idx = np.nonzero(sysm.grid1 == k)[0]
        return float(sysm.F1vec[idx[0]])
    if which == "F2":
        idx = np.nonzero(sysm.grid2 == k)[0]
        return float(sysm.F2vec[idx[0]])
    raise TripleError("which must be 'F1' or 'F2'")


def assemble_and_solve(p: TripleProblem, *, trunc_tol: float = 1e-6,
                       cond_limit: float = COND_LIMIT) -> SolveReport:
    with threadpool_limits(limits=1):
        sysm = assemble(p)
        A = sysm.matrix
        rhs = np.concatenate([sysm.F1vec, sysm.F2vec])
        if not np.all(np.isfinite(A)) or not np.all(np.isfinite(rhs)):
            raise ConditioningError("non-finite entries in the Fredholm system")
        cond = float(np.linalg.norm(A, 1) * np.linalg.norm(np.linalg.inv(A), 1))
        if not cond < cond_limit:
            raise ConditioningError(f"condition estimate {cond:.3e} exceeds {cond_limit:.1e}")
        sol = np.linalg.solve(A, rhs)
    psi1, psi2 = sol[:p.M], sol[p.M:]
    return _reconstruct(p, sysm, psi1, psi2, cond, trunc_tol)


def _reconstruct(p, sysm, psi1, psi2, cond, trunc_tol) -> SolveReport:
    q, al, nu = p.q, p.alpha, p.nu
    tab = _Tables(p)
    u = tab.u
    ks = tab.ks
    lo, hi = nu - al, nu + al
    # P1 over phi1 grid and psi1 grid, P2 over psi2 grid and phi2 grid
    e1 = np.concatenate([p.phi1_grid, p.grid1])
    v1 = np.concatenate([sysm.phi1, psi1])
    e2 = np.concatenate([p.grid2, p.phi2_grid])
    v2 = np.concatenate([psi2, sysm.phi2])
    J1 = tab.rows(lo, e1)
    J2 = tab.rows(hi, e2)
    s1 = (_weights(q, e1) * v1) @ J1
    s2 = (_weights(q, e2) * v2) @ J2
    C1 = (1 - q) ** -2 * u ** (1 - al) * s1
    C2 = (1 - q) ** -2 * u ** (1 - al) * s2
    psi = u ** (2 * al) * (C1 + C2) / (1 + tab.w)

    def scale(v):
        m = np.max(np.abs(v)) if len(v) else 0.0
        return m if m > 0 else 1.0

    trunc = {
        "psi1_edge": float(np.max(np.abs(psi1[-2:])) / scale(psi1)) if np.any(psi1) else 0.0,
        "psi2_edge": float(np.max(np.abs(_weights(q, p.grid2[-2:]) * psi2[-2:]))
                           / scale(_weights(q, p.grid2) * psi2)) if np.any(psi2) else 0.0,
        "phi1_edge": float(np.max(np.abs(_weights(q, p.phi1_grid[-2:]) * sysm.phi1[-2:]))
                           / scale(_weights(q, p.phi1_grid) * sysm.phi1)) if np.any(sysm.phi1) else 0.0,
    }
    worst = max(trunc.values())
    if worst > trunc_tol:
        raise WindowError(f"truncation estimate {worst:.2e} exceeds {trunc_tol:.1e}: {trunc}")
    lat = QLattice(q, 1.0, int(-ks[0]), int(ks[-1]))

    def lf(exps, vals):
        return LatticeFunction.from_values(lat, exps, vals, decay="super")

    return SolveReport(
        psi1=lf(p.grid1, psi1), psi2=lf(p.grid2, psi2),
        C1=lf(ks, C1), C2=lf(ks, C2), psi=lf(ks, psi),
        phi1=lf(p.phi1_grid, sysm.phi1), phi2=lf(p.phi2_grid, sysm.phi2),
        cond=cond, truncation=trunc, variant=p.variant)


# ---------------------------------------------------------------- substitution


def _forward(p: TripleProblem, psi_table: dict, exps, middle: bool) -> np.ndarray:
    q, al = p.q, p.alpha
    ks = np.array(sorted(psi_table), dtype=int)
    u = q ** ks.astype(float)
    vals = np.array([psi_table[k] for k in ks])
    if middle:
        wv = np.array([p.w(x) for x in u])
        vals = vals * u ** (-2 * al) * (1 + wv)
    out = []
    for e in exps:
        J = np.array([lattice_bessel(p.nu, int(k + e), q) for k in ks])
        terms = (1 - q) * u * vals * J
        out.append(math.fsum(sorted(terms, key=abs)))
    return np.array(out)


def check_window(p: TripleProblem, *, guard: int = 10, decades: float = 7.0):
    """Exponents of the psi1 and psi2 grids used for pointwise checks.

    Points closer than ``guard`` to the far grid ends see values beyond the
    grids, and points more than ``decades`` below a (or above b) sit under a
    rounding floor that grows like 1/rho; both are left out.
    """
    depth = max(1, math.ceil(decades / -math.log10(p.q)))
    return p.grid1[:max(1, min(p.M - guard, depth))], p.grid2[:max(1, min(p.N - guard, depth))]


def triple_residual(p: TripleProblem, report_or_psi, *, guard: int = 10,
                    decades: float = 7.0) -> dict:
    """Per-band max residual of the three equations, each over max |data| (or 1).

    The outer bands are checked on ``check_window``; the middle band at every point.
    """
    psi = report_or_psi.psi if isinstance(report_or_psi, SolveReport) else report_or_psi
    table = psi.table if isinstance(psi, LatticeFunction) else dict(psi)
    q = p.q
    g1, g2 = check_window(p, guard=guard, decades=decades)
    bands = {
        "A_a": (g2, p.f1, False),
        "band": (np.array(list(p.band)), p.f2, True),
        "B_b": (g1, p.f3, False),
    }
    out = {}
    with threadpool_limits(limits=1):
        for name, (exps, f, mid) in bands.items():
            lhs = _forward(p, table, exps, mid)
            data = np.array([f(q ** float(e)) for e in exps])
            sc = np.max(np.abs(data)) if np.any(data) else 1.0
            res = np.abs(lhs - data) / sc
            out[name] = (float(np.max(res)), [(float(q ** float(e)), float(r)) for e, r in zip(exps, res)])
    return out


# ---------------------------------------------------------------- instances


def manufactured_problem(q: float, alpha: float, nu: float, w: Callable, *, m_a: int = 2,
                         m_b: int = 0, c1: dict | None = None, c2: dict | None = None,
                         **kw) -> tuple[TripleProblem, dict]:
    """A problem whose data come from planted C1, C2 supported on a few lattice points.

    Returns the problem and the planted psi as an exponent table.
    """
    c1 = c1 if c1 is not None else {-1: 1.0, 0: -0.5, 2: 0.25}
    c2 = c2 if c2 is not None else {0: 0.75, 1: 0.5, 3: -0.3}
    support = sorted(set(c1) | set(c2))
    psi = {}
    for k in support:
        u = q ** float(k)
        C = c1.get(k, 0.0) + c2.get(k, 0.0)
        psi[k] = u ** (2 * alpha) * C / (1 + w(u))
    cache = {}

    def fwd(x, middle):
        e = exponent(x, q)
        key = (e, middle)
        if key not in cache:
            terms = []
            for k, v in psi.items():
                u = q ** float(k)
                if middle:
                    v = v * u ** (-2 * alpha) * (1 + w(u))
                terms.append((1 - q) * u * v * lattice_bessel(nu, k + e, q))
            cache[key] = math.fsum(terms)
        return cache[key]

    def f1(x):
        return fwd(x, False)

    def f2(x):
        return fwd(x, True)

    prob = TripleProblem(q=q, m_a=m_a, m_b=m_b, alpha=alpha, nu=nu, w=w, f1=f1, f2=f2, f3=f1, **kw)
    return prob, psi


def audit_variants(p: TripleProblem, planted: dict | None = None) -> dict:
    """Solve under every constant variant; report residuals and the winner."""
    from dataclasses import replace
    rows = {}
    for name in VARIANTS:
        pv = replace(p, variant=name)
        rep = assemble_and_solve(pv, trunc_tol=math.inf, cond_limit=math.inf)
        res = triple_residual(pv, rep)
        row = {"residual": max(v[0] for v in res.values()), "cond": rep.cond}
        if planted is not None:
            scale = max(abs(v) for v in planted.values())
            row["recovery"] = max(abs(rep.psi.table.get(k, 0.0) - planted.get(k, 0.0))
                                  for k in set(rep.psi.table) | set(planted)) / scale
        rows[name] = row
    winner = min(rows, key=lambda n: rows[n]["residual"])
    return {"winner": winner, "rows": rows}


def example2_problem(q: float = 0.5, **kw) -> TripleProblem:
    """a = q^2, b = 1, nu = 0, alpha = 1/2, w = 0, f1 = f3 = 0, f2 = 1; split g1 = 1 on A_b, g2 = 0."""
    p = dict(q=q, m_a=2, m_b=0, alpha=0.5, nu=0.0, f2=_one, g1=_one, g2=_zero)
    p.update(kw)
    return TripleProblem(**p)


def _one(x):
    return 1.0


def example2_relations(p: TripleProblem, report: SolveReport, *, printed: bool = False,
                       guard: int = 10, decades: float = 7.0) -> dict:
    """Pointwise relative mismatch of the closed coupled relations of the example.

    Corrected forms, with G = Gamma_{q^2}(1/2):

        psi1(r) = (1+q) G^-2 r^(-1/2) int_0^a x^(3/2) psi2(x) / (q r^2 - x^2) d_q x
        psi2(r) = (1+q) G^-2 r^(1/2) int_b^inf x^(1/2) psi1(x) / (q x^2 - r^2) d_q x
                  + (1-q)^(1/2) (1+q)^(3/2) G^-3 r^(1/2) int_0^b d_q x / (q x^2 - r^2)

    ``printed=True`` uses the other constants, powers and range.  The
    denominators never vanish: q^(2i+1) = q^(2j) has no integer solution.
    """
    q, Q = p.q, p.q * p.q
    if (p.alpha, p.nu) != (0.5, 0.0) or p.w(1.0) != 0.0:
        raise TripleError("the closed relations hold for nu = 0, alpha = 1/2, w = 0")
    G = qgamma(0.5, Q)
    psi1, psi2 = report.psi1.table, report.psi2.table
    w1, w2 = check_window(p, guard=guard, decades=decades)

    def jackson(pairs):
        return (1 - q) * math.fsum(sorted((x * v for x, v in pairs), key=abs))

    e1 = []
    for k in w1:
        k = int(k)
        v = psi1[k]
        r = q**k
        s = jackson((q**e, (q**e) ** 1.5 * y / (q * r * r - q ** (2 * e))) for e, y in psi2.items())
        c = (1 + q) / (q * (1 - q) * G**2) * math.sqrt(r) if printed else (1 + q) / G**2 / math.sqrt(r)
        e1.append(abs(v - c * s) / max(abs(v), 1e-300))
    e2 = []
    for k in w2:
        k = int(k)
        v = psi2[k]
        r = q**k
        s1 = jackson((q**e, math.sqrt(q**e) * y / (q * q ** (2 * e) - r * r)) for e, y in psi1.items())
        if printed:
            s2 = jackson((q**e, 1.0 / (q * q ** (2 * e) - r * r)) for e in range(p.m_b, k))
            t = (-(1 + q) * math.sqrt(r) / ((1 - q) * G**2) * s1
                 + (1 + q) ** 1.5 / (math.sqrt(1 - q) * G**3) * math.sqrt(r) * s2)
        else:
            s2 = _head_jackson(q, lambda x: 1.0 / (q * x * x - r * r), p.m_b)
            t = ((1 + q) / G**2 * math.sqrt(r) * s1
                 + math.sqrt(1 - q) * (1 + q) ** 1.5 / G**3 * math.sqrt(r) * s2)
        e2.append(abs(v - t) / max(abs(v), 1e-300))
    return {"Eq1": max(e1), "Eq2": max(e2)}


def _head_jackson(q, f, m, tol=1e-18):
    # int_0^(q^m) f(x) d_q x
    terms = []
    run = 0.0
    for j in range(m, m + 4000):
        x = q**j
        t = x * f(x)
        terms.append(t)
        run += abs(t)
        if j > m + 8 and abs(t) <= tol * run:
            break
    return (1 - q) * math.fsum(sorted(terms, key=abs))
