"""Dual q^2-integral equations with Bessel kernels of orders mu and nu.

    xi^-alpha int_0^inf rho^-alpha psi(rho) J_mu(sqrt(rho xi); q^2) d_{q^2}rho = f(xi),  xi in A_{q^2}
    xi^-beta  int_0^inf rho^-beta  psi(rho) J_nu(sqrt(rho xi); q^2) d_{q^2}rho = g(xi),  xi in B_{q^2}

The solution is sought as ``psi(xi) = xi^e int_0^inf J_lam(sqrt(rho xi)) Theta(rho) d_Q rho``
with ``Q = q^2``, ``lam = (mu+nu)/2 - (alpha-beta)`` and ``e = (lam-mu)/2 + alpha``.
The discontinuous Weber-Schafheitlin integral turns the first equation into a
fractional derivative of order ``a = lam - mu`` of Theta on (0, xi], and the
second into a tail derivative of order ``c = lam - nu`` of Theta on [xi, inf).
Inverting both gives

    Theta(rho) = (1-Q)^(-2-a) rho^(-lam/2) I_Q^a[s^(mu/2+alpha) f](rho),           rho <= 1
    Theta(rho) = rho^(lam/2) calK_Q^(-c)[H](Q rho),
                 H(y) = (1-Q)^(c-2) (y/Q)^(beta-nu/2) g(y/Q),                       rho > 1

with ``calK`` in its semigroup normalisation.  In Erdelyi-Kober form the head
part is ``(1-Q)^(-2-a) rho^(3a/2+alpha-1) I_Q^{mu/2+alpha, a} f(rho)``.

Lattice points are ``Q^j``; the Bessel factor ``J_lam(q^(i+j); q^2)`` is read from
integer exponents.  Large-argument Bessel values vanish super-exponentially on
the lattice, so every sum is effectively finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .qfrac import FracOrder, frac_integral_Iq, kober_calK, kober_I
from .qlattice import LatticeFunction, QLattice
from .qspecial import lattice_bessel, qgamma, qpochhammer_lattice

__all__ = [
    "HypothesisError",
    "DualProblem",
    "DualResidual",
    "solve_dual",
    "dual_residual",
    "theta_head",
    "theta_tail",
    "weighted_norms",
    "QDual",
    "solve_qdual",
    "qdual_residual",
    "example1_closed_form",
    "EXAMPLE1_FORMS",
]


class HypothesisError(ValueError):
    pass


def _zero(x):
    return 0.0


@dataclass(frozen=True)
class DualProblem:
    q: float
    alpha: float
    beta: float
    mu: float
    nu: float
    f: Callable = _zero
    g: Callable = _zero
    gamma_check: float | None = None
    n_neg: int = 40
    n_pos: int = 60
    lam: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lam", (self.mu + self.nu) / 2 - (self.alpha - self.beta))
        if not 0 < self.q < 1:
            raise HypothesisError("q must lie in (0, 1)")
        if not (self.nu > -1 and self.mu > -1 and self.lam > -1):
            raise HypothesisError(
                f"need nu > -1, mu > -1, lambda > -1 (got {self.nu}, {self.mu}, {self.lam})")
        if not self.lam - self.mu - 2 * self.alpha > 0:
            raise HypothesisError(
                f"need lambda - mu - 2 alpha > 0 (got {self.lam - self.mu - 2 * self.alpha})")
        if self.gamma_check is not None:
            lo = max(0.0, self.nu - self.lam)
            if not 1 + self.nu > self.gamma_check > lo:
                raise HypothesisError(
                    f"need 1 + nu > gamma > max(0, nu - lambda) = {lo}")
        # the inverse operators have Gamma_q poles at these orders
        if self.a < 0 and float(self.a).is_integer():
            raise HypothesisError("lambda - mu must not be a negative integer")
        if self.c > 0 and float(self.c).is_integer():
            raise HypothesisError("lambda - nu must not be a positive integer")

    @property
    def Q(self) -> float:
        return self.q * self.q

    @property
    def a(self) -> float:
        return self.lam - self.mu

    @property
    def c(self) -> float:
        return self.lam - self.nu

    @property
    def e(self) -> float:
        return self.a / 2 + self.alpha

    @property
    def lattice(self) -> QLattice:
        return QLattice(self.Q, 1.0, self.n_neg, self.n_pos)


def theta_head(p: DualProblem, j: int) -> float:
    """Theta at rho = Q^j, j >= 0, from the data f."""
    Q, a = p.Q, p.a
    rho = Q**j
    eta = p.mu / 2 + p.alpha
    if a == 0:
        inner = rho**eta * p.f(rho)
        return (1 - Q) ** -2 * rho ** (-p.lam / 2) * inner
    ek = kober_I(FracOrder(eta, a), p.f, rho, Q)
    return (1 - Q) ** (-2 - a) * rho ** (1.5 * a + p.alpha - 1) * ek


def theta_tail(p: DualProblem, j: int) -> float:
    """Theta at rho = Q^j, j <= -1, from the data g."""
    Q, c = p.Q, p.c
    rho = Q**j
    expo = p.beta - p.nu / 2

    def H(y):
        return (1 - Q) ** (c - 2) * (y / Q) ** expo * p.g(y / Q)

    return rho ** (p.lam / 2) * kober_calK(-c, H, Q * rho, Q)


def _theta(p: DualProblem) -> dict[int, float]:
    th = {j: theta_head(p, j) for j in range(0, p.n_pos + 1)}
    th.update({j: theta_tail(p, j) for j in range(-p.n_neg, 0)})
    return th


def solve_dual(p: DualProblem) -> LatticeFunction:
    """psi tabulated on the Q-lattice window of ``p``."""
    Q, q = p.Q, p.q
    th = _theta(p)
    js = sorted(th)
    tvals = np.array([Q**j * th[j] for j in js])
    vals = []
    for i in range(-p.n_neg, p.n_pos + 1):
        jb = np.array([lattice_bessel(p.lam, i + j, q) for j in js])
        terms = (1 - Q) * jb * tvals
        vals.append((Q**i) ** p.e * math.fsum(sorted(terms, key=abs)))
    return LatticeFunction.from_values(p.lattice, range(-p.n_neg, p.n_pos + 1), vals, decay="super")


@dataclass(frozen=True)
class DualResidual:
    head: float
    tail: float
    head_points: tuple
    tail_points: tuple

    @property
    def max(self) -> float:
        return max(self.head, self.tail)


def _forward(p: DualProblem, psi: LatticeFunction, i: int, w: float, order: float) -> float:
    Q, q = p.Q, p.q
    terms = []
    for j, v in psi.table.items():
        rho = Q**j
        terms.append(rho ** (1 - w) * v * lattice_bessel(order, i + j, q))
    xi = Q**i
    return xi**-w * (1 - Q) * math.fsum(sorted(terms, key=abs))


def dual_residual(p: DualProblem, psi: LatticeFunction, *, n_check: int | None = None) -> DualResidual:
    """Normalised max residuals of both equations on the window.

    Each residual is divided by the largest data value on its band (or 1 when
    the data vanish there).
    """
    Q = p.Q
    nh = p.n_pos if n_check is None else min(n_check, p.n_pos)
    nt = p.n_neg if n_check is None else min(n_check, p.n_neg)
    hr, tr = [], []
    for i in range(0, nh + 1):
        hr.append((Q**i, _forward(p, psi, i, p.alpha, p.mu) - p.f(Q**i), p.f(Q**i)))
    for i in range(-nt, 0):
        tr.append((Q**i, _forward(p, psi, i, p.beta, p.nu) - p.g(Q**i), p.g(Q**i)))

    def norm(rows):
        if not rows:
            return 0.0, ()
        scale = max(1e-300, max(abs(r[2]) for r in rows))
        if scale == 1e-300:
            scale = 1.0
        res = tuple((x, abs(d) / scale) for x, d, _ in rows)
        return max(r for _, r in res), res

    h, hp = norm(hr)
    t, tp = norm(tr)
    return DualResidual(h, t, hp, tp)


def weighted_norms(p: DualProblem, psi: LatticeFunction) -> dict[str, float]:
    """Windowed Jackson sums of |rho^w psi| for the weights of the solution space."""
    Q = p.Q
    ws = {"mu/2-alpha": p.mu / 2 - p.alpha, "nu/2-beta": p.nu / 2 - p.beta}
    if p.gamma_check is not None:
        ws["nu/2-beta-gamma"] = p.nu / 2 - p.beta - p.gamma_check
    out = {}
    for name, w in ws.items():
        out[name] = (1 - Q) * math.fsum(Q**j * abs((Q**j) ** w * v) for j, v in psi.table.items())
    return out


# ------------------------------------------------------------ q-variable form


@dataclass(frozen=True)
class QDual:
    """Dual equations in the q-variable with one Bessel order and a split at q^m:

        int_0^inf u^(-2 s1) psi(u) J_nu(u rho; q^2) d_q u = F1(rho),  rho in A_{q, q^m}
        int_0^inf u^(-2 s2) psi(u) J_nu(u rho; q^2) d_q u = F2(rho),  rho in B_{q, q^m}

    They map onto ``DualProblem`` with rho' = u^2, alpha' = min(0, s2 - s1),
    beta' = alpha' - s1 + s2 and mu = nu.
    """
    q: float
    nu: float
    s1: float
    s2: float
    F1: Callable = _zero
    F2: Callable = _zero
    m: int = 0
    n_neg: int = 30
    n_pos: int = 60

    @property
    def alpha_p(self) -> float:
        return min(0.0, self.s2 - self.s1)

    @property
    def beta_p(self) -> float:
        return self.alpha_p - self.s1 + self.s2

    def dual(self) -> DualProblem:
        q, m = self.q, self.m
        ap, bp = self.alpha_p, self.beta_p
        sc = q**m
        # rho = q^m rho~ moves the split to 1; the data pick up q^(-2 m s)
        c1, c2 = q ** (-2 * m * self.s1), q ** (-2 * m * self.s2)

        def f(xi):
            return xi**-ap * c1 * self.F1(sc * math.sqrt(xi))

        def g(xi):
            return xi**-bp * c2 * self.F2(sc * math.sqrt(xi))

        return DualProblem(q, ap, bp, self.nu, self.nu, f=f, g=g, n_neg=self.n_neg, n_pos=self.n_pos)


def solve_qdual(p: QDual) -> LatticeFunction:
    """psi on u = q^k for the window of the mapped problem (shifted by -m)."""
    q = p.q
    sol = solve_dual(p.dual())
    ks, vals = [], []
    for j, v in sorted(sol.table.items()):
        u = q**j
        # psi~(u) = (1+q) u (u^2)^(s1 - alpha') psi'(u^2); psi(u) = q^m psi~(u q^m)
        ks.append(j - p.m)
        vals.append(q**p.m * (1 + q) * u * (u * u) ** (p.s1 - p.alpha_p) * v)
    lat = QLattice(q, 1.0, max(0, -ks[0]), max(0, ks[-1]))
    return LatticeFunction.from_values(lat, ks, vals, decay="super")


def qdual_residual(p: QDual, psi: LatticeFunction, *, n_check: int = 30) -> DualResidual:
    """Residuals of both q-variable equations on n_check points per side of the split."""
    q = p.q

    def fwd(i, s):
        terms = [(1 - q) * (q**k) ** (1 - 2 * s) * v * lattice_bessel(p.nu, k + i, q)
                 for k, v in psi.table.items()]
        return math.fsum(sorted(terms, key=abs))

    head = [(q**i, fwd(i, p.s1) - p.F1(q**i), p.F1(q**i)) for i in range(p.m, p.m + n_check)]
    tail = [(q**i, fwd(i, p.s2) - p.F2(q**i), p.F2(q**i)) for i in range(p.m - 1, p.m - 1 - n_check, -1)]

    def norm(rows):
        scale = max(abs(r[2]) for r in rows) or 1.0
        res = tuple((x, abs(d) / scale) for x, d, _ in rows)
        return max(r for _, r in res), res

    h, hp = norm(head)
    t, tp = norm(tail)
    return DualResidual(h, t, hp, tp)


# Closed forms for the two reductions of the triple system with w = 0.
#   head: psi(u) = u^(1+alpha) int_0^a x psi2(x) J_(nu+alpha)(ux) d_q x
#   tail: psi(u) = u^(1+alpha) int_b^inf x psi1(x) J_(nu-alpha)(ux) d_q x
# with psi2, psi1 from the data; the forms differ in constants and powers.
EXAMPLE1_FORMS = {
    1: ("pair", "final", "derived"),
    2: ("printed", "derived"),
}


def _psi2(q, al, nu, f, k, scale):
    Q = q * q
    r = q**k
    terms = [q**j * (q ** (k + j)) ** (nu + 1) * qpochhammer_lattice(j + 1, Q, al - 1) * f(q ** (k + j))
             for j in range(0, 4000) if q ** (k + j) > 1e-300]
    s = r * (1 - q) * math.fsum(sorted(terms, key=abs))
    return scale * (1 - Q) ** -al * (1 + q) * r ** (al - nu - 2) / qgamma(al, Q) * s


def _psi1(q, al, nu, f, k, printed):
    Q = q * q
    r = q**k
    terms = []
    for j in range(1, 4000):
        x = q ** (k - j)
        ker = qpochhammer_lattice(j, Q, al - 1)
        v = f(x) if printed else f(q * x)
        t = q**-j * ker * x ** (2 * al - nu - 1) * v
        terms.append(t)
        if j > 10 and abs(t) <= 1e-18 * max(abs(z) for z in terms):
            break
    s = r * (1 - q) * math.fsum(sorted(terms, key=abs))
    if printed:
        return -((1 - Q) ** -al) * q ** (-2 * al) * r ** (al + nu) / ((1 - q) ** 2 * qgamma(al, Q)) * s
    return r ** (nu - al) * q ** (2 * al - nu) * (1 + q) * (1 - Q) ** -al / qgamma(al, Q) * s


def example1_closed_form(q: float, alpha: float, nu: float, f: Callable, reduction: int,
                         form: str, ks, *, m: int = 0, depth: int = 200) -> dict:
    """psi(q^k) for every k in ``ks`` from the closed forms of the two reductions, split at q^m.

    Reduction 1 (data f on (0, a], zero beyond): ``pair`` pairs the displayed
    psi2, which carries (1-q)^-2, with the displayed reconstruction; ``final``
    is the one-line formula through I_{q^2}^alpha; ``derived`` uses psi2 without
    the factor and puts (1-q)^-2 in the reconstruction.  Reduction 2 (data f
    beyond b, zero on (0, b]): ``printed`` is the displayed psi1, ``derived``
    the corrected one with f(qx), rho^(nu-alpha), q^(2alpha-nu).
    """
    if form not in EXAMPLE1_FORMS.get(reduction, ()):
        raise ValueError(f"reduction {reduction} has forms {EXAMPLE1_FORMS.get(reduction)}")
    Q = q * q
    al = alpha
    c = 1.0
    if reduction == 1:
        js = range(m, m + depth)
        order = nu + al
        if form == "final":
            inner = {j: q**j * (q**j) ** (1 - al - nu)
                     * frac_integral_Iq(al, lambda t: t ** (nu / 2) * f(math.sqrt(t)), q ** (2 * j), Q)
                     for j in js}
            c, rec = (1 - Q) ** -al / (1 - Q), 1.0
        else:
            scale, rec = ((1 - q) ** -2, 1.0) if form == "pair" else (1.0, (1 - q) ** -2)
            inner = {j: (q**j) ** 2 * _psi2(q, al, nu, f, j, scale) for j in js}
    else:
        printed = form == "printed"
        rec = 1.0 if printed else (1 - q) ** -2
        inner = {j: (q**j) ** 2 * _psi1(q, al, nu, f, j, printed)
                 for j in range(m - 1, m - 1 - depth // 3, -1)}
        order = nu - al
    out = {}
    for k in ks:
        k = int(k)
        terms = [v * lattice_bessel(order, k + j, q) for j, v in inner.items()]
        out[k] = c * rec * (q**k) ** (1 + al) * (1 - q) * math.fsum(sorted(terms, key=abs))
    return out
