"""Triple q^2-integral equations with three Bessel orders, solved through two dual pairs.

    xi^-gamma int rho^-gamma psi J_kappa(sqrt(rho xi)) d_{q^2}rho = f(xi),  xi <= a
    xi^-alpha int rho^-alpha psi J_mu   (sqrt(rho xi)) d_{q^2}rho = g(xi),  a < xi <= 1
    xi^-beta  int rho^-beta  psi J_nu   (sqrt(rho xi)) d_{q^2}rho = h(xi),  xi > 1

With ``psi = A1 + A2`` and ``g = g1 + g2`` the pieces solve

    A1:  (alpha, mu) = g1 on xi <= 1,   (beta, nu)  = h - f2 on xi > 1
    A2:  (gamma, kappa) = f - f1 on xi <= a,   (alpha, mu) = g2 on xi > a

where f1 is the (gamma, kappa) transform of A1 and f2 the (beta, nu) transform
of A2.  Each pair is a dual problem; the coupling is closed by damped Picard
iteration on (f1, f2).  The second pair is moved to the split 1 by
``A~(rho) = A(rho/a)/a``, which leaves the weights unchanged.

Points are ``Q^j`` with ``Q = q^2`` and ``a = Q^m_a``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .dualsolver import DualProblem, HypothesisError, solve_dual
from .qlattice import DivergenceError, LatticeFunction, QLattice
from .qspecial import lattice_bessel

__all__ = [
    "Triple2Problem",
    "Triple2Result",
    "solve_triple2",
    "residual_triple2",
    "transform",
]


def _zero(x):
    return 0.0


@dataclass(frozen=True)
class Triple2Problem:
    q: float
    alpha: float
    beta: float
    gamma: float
    mu: float
    nu: float
    kappa: float
    m_a: int = 2
    f: Callable = _zero
    g1: Callable = _zero
    g2: Callable = _zero
    h: Callable = _zero
    n_neg: int = 30
    n_pos: int = 50
    max_iter: int = 60
    theta: float = 1.0
    fp_tol: float = 1e-8
    lam_A: float = field(init=False)
    lam_B: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lam_A", (self.mu + self.nu) / 2 - (self.alpha - self.beta))
        object.__setattr__(self, "lam_B", (self.mu + self.kappa) / 2 - (self.gamma - self.alpha))
        if not 0 < self.q < 1:
            raise HypothesisError("q must lie in (0, 1)")
        for name in ("mu", "nu", "kappa"):
            if not getattr(self, name) > -1:
                raise HypothesisError(f"need {name} > -1")
        if not self.m_a >= 1:
            raise HypothesisError("need a = q^(2 m_a) with m_a >= 1, so 0 < a < 1")
        if not self.m_a < self.n_neg:
            raise HypothesisError("the window must reach beyond 1/a (m_a < n_neg)")
        if not 0 < self.theta <= 1:
            raise HypothesisError("damping theta must lie in (0, 1]")
        # both pairs must satisfy the dual-problem hypotheses
        self.pair_A()
        self.pair_B()

    @property
    def Q(self) -> float:
        return self.q * self.q

    @property
    def a(self) -> float:
        return self.Q**self.m_a

    def g(self, xi: float) -> float:
        return self.g1(xi) + self.g2(xi)

    def pair_A(self, f2: Callable = _zero) -> DualProblem:
        return DualProblem(self.q, self.alpha, self.beta, self.mu, self.nu,
                           f=self.g1, g=lambda x: self.h(x) - f2(x),
                           n_neg=self.n_neg, n_pos=self.n_pos)

    def pair_B(self, f1: Callable = _zero) -> DualProblem:
        a = self.a
        return DualProblem(self.q, self.gamma, self.alpha, self.kappa, self.mu,
                           f=lambda x: self.f(a * x) - f1(a * x), g=lambda x: self.g2(a * x),
                           n_neg=self.n_neg - self.m_a, n_pos=self.n_pos + self.m_a)


def transform(table: dict, q: float, weight: float, order: float, i: int) -> float:
    """xi^-w int rho^-w A(rho) J_order(sqrt(rho xi); q^2) d_{q^2}rho at xi = Q^i."""
    Q = q * q
    terms = [(Q**j) ** (1 - weight) * v * lattice_bessel(order, i + j, q)
             for j, v in table.items() if v != 0.0]
    return (Q**i) ** -weight * (1 - Q) * math.fsum(sorted(terms, key=abs))


class _Lazy:
    """A transform of a tabulated function, evaluated at lattice points on demand."""

    def __init__(self, table, q, weight, order, scale=1.0):
        self.table, self.q, self.w, self.order, self.scale = table, q, weight, order, scale
        self.cache = {}

    def __call__(self, xi: float) -> float:
        Q = self.q * self.q
        i = round(math.log(xi) / math.log(Q))
        if i not in self.cache:
            self.cache[i] = self.scale * transform(self.table, self.q, self.w, self.order, i)
        return self.cache[i]


def _relaxed(new: _Lazy, old: Callable, theta: float) -> Callable:
    if theta == 1.0:
        return new

    def f(x):
        return theta * new(x) + (1 - theta) * old(x)
    return f


@dataclass
class Triple2Result:
    psi: LatticeFunction
    A1: LatticeFunction
    A2: LatticeFunction
    trace: list
    converged: bool
    sweeps: int


def _unscale_B(p: Triple2Problem, sol: LatticeFunction) -> dict:
    # A2(rho) = a A~(a rho): exponent j of A2 is exponent j + m_a of A~
    return {j - p.m_a: p.a * v for j, v in sol.table.items()}


def solve_triple2(p: Triple2Problem) -> Triple2Result:
    """Damped Picard iteration on the cross terms f1 (on xi <= a) and f2 (on xi > 1).

    ``trace`` holds the sup distance between successive iterates; the loop
    stops once it falls below ``fp_tol`` times the sup of the iterate.
    """
    q = p.q
    f1: Callable = _zero
    f2: Callable = _zero
    prev = None
    trace = []
    rising = 0
    js = range(-p.n_neg, p.n_pos + 1)
    for sweep in range(1, p.max_iter + 1):
        A1 = solve_dual(p.pair_A(f2)).table
        f1_new = _Lazy(A1, q, p.gamma, p.kappa)
        f1 = _relaxed(f1_new, f1, p.theta)
        A2 = _unscale_B(p, solve_dual(p.pair_B(f1)))
        f2_new = _Lazy(A2, q, p.beta, p.nu)
        f2 = _relaxed(f2_new, f2, p.theta)
        psi = {j: A1.get(j, 0.0) + A2.get(j, 0.0) for j in js}
        scale = max(abs(v) for v in psi.values())
        if scale == 0.0:
            break
        if prev is not None:
            dist = max(abs(psi[j] - prev[j]) for j in js)
            trace.append(dist)
            if dist <= p.fp_tol * scale:
                break
        if len(trace) >= 2 and trace[-1] > trace[-2]:
            rising += 1
            if rising >= 3:
                raise DivergenceError(f"Picard iteration is not contracting: {trace}")
        else:
            rising = 0
        prev = psi
    else:
        raise DivergenceError(f"no convergence in {p.max_iter} sweeps: {trace}")
    lat = QLattice(p.Q, 1.0, p.n_neg, p.n_pos)

    def lf(d):
        return LatticeFunction.from_values(lat, js, [d.get(j, 0.0) for j in js], decay="super")

    return Triple2Result(lf(psi), lf(A1), lf(A2), trace, True, sweep)


def residual_triple2(p: Triple2Problem, psi, *, n_check: int = 20) -> dict:
    """Normalised max residual of the three equations on each band."""
    q, Q = p.q, p.Q
    table = psi.table if isinstance(psi, LatticeFunction) else dict(psi)
    bands = {
        "E1": (range(p.m_a, p.m_a + n_check), p.gamma, p.kappa, p.f),
        "E2": (range(0, p.m_a), p.alpha, p.mu, p.g),
        "E3": (range(-1, -1 - n_check, -1), p.beta, p.nu, p.h),
    }
    out = {}
    for name, (idx, w, order, data) in bands.items():
        rows = [(Q**i, transform(table, q, w, order, i), data(Q**i)) for i in idx]
        scale = max(abs(r[2]) for r in rows) or 1.0
        res = [(x, abs(l - d) / scale) for x, l, d in rows]
        out[name] = (max(r for _, r in res), res)
    return out
