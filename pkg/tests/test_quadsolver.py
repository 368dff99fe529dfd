import pytest

from qtriple.dualsolver import HypothesisError, solve_dual
from qtriple.qlattice import DivergenceError
from qtriple.quadsolver import Triple2Problem, _Lazy, residual_triple2, solve_triple2, transform

Q = 0.5
# (alpha, beta, gamma) = (0, 0.25, -0.25) with all orders 0.5 satisfies both pair hypotheses
ORDERS = dict(alpha=0.0, beta=0.25, gamma=-0.25, mu=0.5, nu=0.5, kappa=0.5)
DATA = dict(f=lambda x: 1.0, g1=lambda x: x, g2=lambda x: 1 / x, h=lambda x: x**-2.0)


def problem(**kw):
    args = dict(ORDERS, m_a=2)
    args.update(kw)
    return Triple2Problem(Q, **args)


def test_zero_data_is_zero_after_one_sweep():
    p = problem()
    r = solve_triple2(p)
    assert r.sweeps == 1 and r.converged
    assert not any(r.psi.table.values())
    assert all(v[0] == 0.0 for v in residual_triple2(p, r.psi).values())


def test_all_quarter_exponents_violate_the_pair_hypotheses():
    with pytest.raises(HypothesisError):
        problem(alpha=0.25, beta=0.25, gamma=0.25)


@pytest.mark.parametrize("kw", [dict(mu=-1.5), dict(m_a=0), dict(theta=0.0), dict(m_a=40)])
def test_invalid_controls(kw):
    with pytest.raises(HypothesisError):
        problem(**kw)


def test_decoupled_instance_matches_the_dual_solver():
    g1, h = DATA["g1"], DATA["h"]
    base = problem(g1=g1, h=h)
    A1 = solve_dual(base.pair_A())
    induced = _Lazy(A1.table, Q, base.gamma, base.kappa)
    p = problem(g1=g1, h=h, f=induced)
    r = solve_triple2(p)
    assert not any(r.A2.table.values())
    scale = max(abs(v) for v in A1.table.values())
    assert max(abs(r.psi.table[k] - A1.table.get(k, 0.0)) for k in r.psi.table) <= 1e-8 * scale
    assert max(v[0] for v in residual_triple2(p, r.psi).values()) <= 1e-7


@pytest.fixture(scope="module")
def generic():
    p = problem(**DATA)
    return p, solve_triple2(p)


def test_generic_instance_contracts(generic):
    p, r = generic
    assert r.converged and len(r.trace) >= 2
    ratios = [b / a for a, b in zip(r.trace, r.trace[1:])]
    assert all(x < 1 for x in ratios)
    assert max(v[0] for v in residual_triple2(p, r.psi).values()) <= 10 * p.fp_tol


def test_fixed_point_consistency(generic):
    p, r = generic
    f2 = _Lazy(r.A2.table, Q, p.beta, p.nu)
    A1 = solve_dual(p.pair_A(f2))
    scale = max(abs(v) for v in r.psi.table.values())
    assert max(abs(A1.table.get(k, 0.0) - r.A1.table[k]) for k in r.A1.table) <= p.fp_tol * scale


def test_damping_reaches_the_same_fixed_point(generic):
    p, r = generic
    damped = solve_triple2(problem(**DATA, theta=0.5, max_iter=80))
    scale = max(abs(v) for v in r.psi.table.values())
    assert max(abs(damped.psi.table[k] - r.psi.table[k]) for k in r.psi.table) <= 1e-7 * scale


def test_linearity(generic):
    p, r = generic
    other = dict(f=lambda x: x, g1=lambda x: 1.0, g2=lambda x: x**-2.0, h=lambda x: x**-3.0)
    r2 = solve_triple2(problem(**other))
    a, b = 0.7, -1.3
    mix = {k: (lambda k: lambda x: a * DATA[k](x) + b * other[k](x))(k) for k in DATA}
    r12 = solve_triple2(problem(**mix))
    scale = max(abs(v) for v in r12.psi.table.values())
    err = max(abs(r12.psi.table[k] - a * r.psi.table[k] - b * r2.psi.table[k]) for k in r12.psi.table)
    assert err <= 1e-8 * scale


def test_sweep_cap_raises():
    with pytest.raises(DivergenceError):
        solve_triple2(problem(**DATA, max_iter=1))


def test_transform_is_linear_in_the_table():
    t1, t2 = {0: 1.0, 3: -2.0}, {1: 0.5}
    both = {0: 1.0, 3: -2.0, 1: 0.5}
    for i in (-3, 0, 4):
        assert transform(both, Q, 0.25, 0.5, i) == pytest.approx(
            transform(t1, Q, 0.25, 0.5, i) + transform(t2, Q, 0.25, 0.5, i), rel=1e-14, abs=1e-300)
