"""Geometric lattices, Jackson q-integrals, q-derivatives and the q -> q^2 rebase.

A lattice point is always addressed by its integer exponent ``k`` (the point
is ``t * q**k``); membership is decided on exponents, never on floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "LatticeError",
    "DomainError",
    "DivergenceError",
    "NoLimitError",
    "QLattice",
    "LatticeFunction",
    "default_window",
    "jackson_integral",
    "q_derivative",
    "rebase_q2",
]

TERM_TOL = 1e-15
GUARD_BLOCK = 16
WINDOW_CAP = 400
_EXTRA_TERMS = 4000
DECAY_TAGS = ("none", "power", "super")


class LatticeError(ValueError):
    pass


class DomainError(LatticeError):
    pass


class DivergenceError(ArithmeticError):
    pass


class NoLimitError(ArithmeticError):
    pass


def default_window(q: float, tol: float = np.finfo(float).eps) -> int:
    return min(WINDOW_CAP, math.ceil(math.log(tol) / math.log(q)))


@dataclass(frozen=True)
class QLattice:
    """The points ``t q^k`` for ``-n_neg <= k <= n_pos``.

    ``k >= 0`` is the bounded slice A_{q,t}, ``k < 0`` the unbounded slice B_{q,t}.
    """

    q: float
    t: float = 1.0
    n_neg: int | None = None
    n_pos: int | None = None

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise LatticeError(f"q must lie in (0, 1), got {self.q}")
        if not self.t > 0:
            raise LatticeError(f"t must be positive, got {self.t}")
        w = default_window(self.q)
        if self.n_neg is None:
            object.__setattr__(self, "n_neg", w)
        if self.n_pos is None:
            object.__setattr__(self, "n_pos", w)
        if self.n_neg < 0 or self.n_pos < 0:
            raise LatticeError("window counts must be nonnegative")

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(-self.n_neg, self.n_pos + 1)

    @property
    def points(self) -> np.ndarray:
        return self.point(self.exponents)

    def point(self, k):
        return self.t * self.q ** np.asarray(k, dtype=float) if np.ndim(k) else self.t * self.q ** int(k)

    def in_window(self, k: int) -> bool:
        return -self.n_neg <= k <= self.n_pos

    def exponent_of(self, x: float, rtol: float = 1e-12) -> int:
        """Exponent of a lattice point given as a float; DomainError if off-lattice."""
        if not x > 0:
            raise DomainError(f"{x} is not a point of the lattice")
        k = round(math.log(x / self.t) / math.log(self.q))
        if abs(self.point(k) - x) > rtol * x:
            raise DomainError(f"{x} is not on the lattice t q^k with t={self.t}, q={self.q}")
        return k

    def slice_A(self) -> np.ndarray:
        return np.arange(0, self.n_pos + 1)

    def slice_B(self) -> np.ndarray:
        return np.arange(-self.n_neg, 0)

    def squared(self) -> "QLattice":
        return QLattice(self.q**2, self.t**2, self.n_neg, self.n_pos)


@dataclass(frozen=True)
class LatticeFunction:
    """A function on a q-lattice: a callable or an exponent table.

    ``func`` receives the point ``x`` (or the exponent when ``by_exponent``).
    Tabulated functions refuse evaluation outside their table.
    """

    func: Callable | None = None
    table: Mapping[int, float] | None = None
    lattice: QLattice | None = None
    decay: str = "none"
    by_exponent: bool = False
    _frozen: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if (self.func is None) == (self.table is None):
            raise ValueError("give exactly one of func or table")
        if self.decay not in DECAY_TAGS:
            raise ValueError(f"decay must be one of {DECAY_TAGS}")
        if self.table is not None:
            if self.lattice is None:
                raise ValueError("a tabulated function needs its lattice")
            tab = {int(k): float(v) for k, v in self.table.items()}
            if not all(math.isfinite(v) for v in tab.values()):
                raise ValueError("tabulated values must be finite")
            object.__setattr__(self, "table", tab)
        if self.by_exponent and self.lattice is None:
            raise ValueError("exponent-based functions need their lattice")

    @classmethod
    def constant(cls, c: float, decay: str = "none") -> "LatticeFunction":
        return cls(func=lambda x: c, decay=decay)

    @classmethod
    def from_values(cls, lat: QLattice, exponents, values, decay: str = "none") -> "LatticeFunction":
        return cls(table=dict(zip(map(int, exponents), values)), lattice=lat, decay=decay)

    def at(self, k: int, lat: QLattice | None = None) -> float:
        """Value at the point with exponent ``k`` of ``lat`` (default: own lattice)."""
        lat = lat or self.lattice
        if self.table is not None:
            if lat is not self.lattice and lat != self.lattice:
                k = self._translate(k, lat)
            try:
                return self.table[k]
            except KeyError:
                raise DomainError(f"exponent {k} lies outside the tabulated window") from None
        if self.by_exponent:
            if lat != self.lattice:
                k = self._translate(k, lat)
            return float(self.func(k))
        if lat is None:
            raise ValueError("a lattice is required to locate exponent points")
        return float(self.func(lat.point(k)))

    def _translate(self, k: int, lat: QLattice) -> int:
        own = self.lattice
        if own.q != lat.q:
            raise DomainError("lattices with different q")
        return own.exponent_of(lat.point(k))

    def __call__(self, x: float) -> float:
        if self.func is not None and not self.by_exponent:
            return float(self.func(x))
        return self.at(self.lattice.exponent_of(x))

    def tabulate(self, lat: QLattice) -> "LatticeFunction":
        ks = lat.exponents
        return LatticeFunction.from_values(lat, ks, [self.at(int(k), lat) for k in ks], self.decay)


def _resolve_x(x, lat: QLattice) -> int:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    return lat.exponent_of(float(x))


def _available(f: LatticeFunction, k: int, lat: QLattice) -> bool:
    if f.table is None:
        return True
    try:
        f.at(k, lat)
    except DomainError:
        return False
    return True


def _tail_sum(f: LatticeFunction, lat: QLattice, k0: int, step: int, stop_window: int,
              term_tol: float, check_decay: bool):
    """Sum of q^k f(t q^k) over k = k0, k0+step, ...; returns (terms, error estimate)."""
    q = lat.q
    terms = []
    run = 0.0
    k = k0
    non_decrease = 0
    limit = stop_window + (_EXTRA_TERMS if f.table is None else 0)
    n = 0
    while True:
        if step > 0 and k > limit or step < 0 and k < -limit:
            break
        if f.table is not None and not _available(f, k, lat):
            break
        term = q**k * f.at(k, lat)
        terms.append(term)
        run += abs(term)
        n += 1
        past_window = k >= stop_window if step > 0 else k <= -stop_window
        if check_decay and len(terms) > 1:
            non_decrease = non_decrease + 1 if abs(term) >= abs(terms[-2]) and term != 0 else 0
            if non_decrease >= GUARD_BLOCK:
                raise DivergenceError("Jackson tail is not decreasing over the guard block")
        if past_window and abs(term) <= term_tol * run:
            break
        k += step
    else:  # pragma: no cover
        pass
    if len(terms) >= 2 and terms[-2] != 0:
        r = min(abs(terms[-1] / terms[-2]), 0.99)
        err = abs(terms[-1]) * r / (1 - r)
    else:
        err = abs(terms[-1]) if terms else 0.0
    return terms, err


def jackson_integral(f: LatticeFunction, mode: str, x=None, lat: QLattice | None = None, *,
                     term_tol: float = TERM_TOL, return_error: bool = False):
    """Truncated Jackson q-integral of ``f`` on ``lat``.

    ``zero_to_x``:  x(1-q) sum_{k>=0} q^k f(x q^k)
    ``x_to_inf``:   x(1-q) sum_{k>=1} q^-k f(x q^-k)
    ``zero_to_inf``: (1-q) sum_k t q^k f(t q^k) over the whole lattice

    ``x`` may be a float lattice point or an integer exponent.  Terms are
    accumulated with ``math.fsum`` so the result does not depend on order.
    """
    lat = lat or f.lattice
    if lat is None:
        raise ValueError("a lattice is required")
    q = lat.q
    if mode in ("x_to_inf", "zero_to_inf") and f.decay == "none":
        raise DivergenceError(f"mode {mode} needs a decay tag other than 'none'")
    if mode == "zero_to_x":
        kx = _resolve_x(x, lat)
        terms, err = _tail_sum(f, lat, kx, +1, max(lat.n_pos, kx), term_tol, False)
        scale = lat.t * (1 - q)
    elif mode == "x_to_inf":
        kx = _resolve_x(x, lat)
        terms, err = _tail_sum(f, lat, kx - 1, -1, max(lat.n_neg, -(kx - 1)), term_tol, True)
        scale = lat.t * (1 - q)
    elif mode == "zero_to_inf":
        head, e1 = _tail_sum(f, lat, 0, +1, lat.n_pos, term_tol, False)
        tail, e2 = _tail_sum(f, lat, -1, -1, lat.n_neg, term_tol, True)
        terms, err = head + tail, e1 + e2
        scale = lat.t * (1 - q)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    # fsum is exactly rounded, hence independent of summation order
    val = scale * math.fsum(sorted(terms, key=abs))
    if return_error:
        return val, scale * err
    return val


def q_derivative(f, x: float, q: float, *, x0: float = 1.0, tol: float = 1e-10,
                 max_steps: int = 200) -> float:
    """D_q f(x) = (f(x) - f(qx)) / (x (1-q)); at x = 0 the limit along x0 q^n."""
    fn = f if callable(f) else f.__call__
    if x != 0:
        return (fn(x) - fn(q * x)) / (x * (1 - q))
    prev = None
    xn = x0
    for _ in range(max_steps):
        cur = (fn(xn) - fn(0.0)) / xn
        if prev is not None and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
        xn *= q
    raise NoLimitError("difference quotients at 0 fail the Cauchy test")


def rebase_q2(f: LatticeFunction, direction: str) -> LatticeFunction:
    """Move a function between the q-lattice and the q^2-lattice by composition.

    ``to_q2`` gives F(s) = f(sqrt(s)) on the lattice (t^2, q^2); ``from_q2`` gives
    f(x) = F(x^2).  Exponents are preserved: (t q^k)^2 = t^2 (q^2)^k.
    """
    if direction not in ("to_q2", "from_q2"):
        raise ValueError("direction must be 'to_q2' or 'from_q2'")
    if f.table is not None:
        lat = f.lattice
        if direction == "to_q2":
            new = lat.squared()
        else:
            new = QLattice(math.sqrt(lat.q), math.sqrt(lat.t), lat.n_neg, lat.n_pos)
        return LatticeFunction(table=dict(f.table), lattice=new, decay=f.decay)
    if f.by_exponent:
        lat = f.lattice
        new = lat.squared() if direction == "to_q2" else QLattice(
            math.sqrt(lat.q), math.sqrt(lat.t), lat.n_neg, lat.n_pos)
        return LatticeFunction(func=f.func, lattice=new, decay=f.decay, by_exponent=True)
    g = f.func
    if direction == "to_q2":
        return LatticeFunction(func=lambda s: g(math.sqrt(s)), decay=f.decay)
    return LatticeFunction(func=lambda x: g(x * x), decay=f.decay)
