import math
from dataclasses import replace

import numpy as np
import pytest

from qtriple import triplesolver as ts
from qtriple.qspecial import lattice_bessel, qgamma, qtrig

Q = 0.5


def zero(x):
    return 0.0


def base(**kw):
    args = dict(q=Q, m_a=2, m_b=0, alpha=0.5, nu=0.5)
    args.update(kw)
    return ts.TripleProblem(**args)


def with_split(p, policy):
    g1, g2 = ts.split_middle(p, policy)
    return replace(p, g1=g1, g2=g2)


@pytest.fixture(scope="module")
def example2():
    p = ts.example2_problem(Q)
    return p, ts.assemble_and_solve(p)


# ------------------------------------------------------------- validation


@pytest.mark.parametrize("kw", [dict(alpha=1.5), dict(alpha=0.0), dict(nu=-1.5), dict(nu=-0.6),
                                dict(m_a=0), dict(variant="other"), dict(t_check=10.0)])
def test_invalid_problems(kw):
    with pytest.raises(ts.TripleError):
        base(**kw)


def test_negative_weight_is_rejected():
    with pytest.raises(ts.TripleError):
        base(w=lambda u: -1.0)


def test_bad_user_split_is_rejected():
    p = base(f2=lambda r: 1.0)
    with pytest.raises(ts.TripleError):
        ts.split_middle(p, "user", lambda r: 0.5, lambda r: 0.25)


# ------------------------------------------------------------- split and Phi


@pytest.mark.parametrize("policy", ["head_all", "tail_all"])
def test_zero_band_data_splits_to_zero(policy):
    p = base()
    g1, g2 = ts.split_middle(p, policy)
    for k in range(-5, 10):
        assert g1(Q**k) == 0.0 and g2(Q**k) == 0.0


def test_example2_split():
    p = ts.example2_problem(Q)
    g1, g2 = p.split()
    assert all(g1(Q**k) == 1.0 for k in range(0, 30))
    assert all(g2(Q**k) == 0.0 for k in range(-10, 2))


def test_split_invariance():
    p = base(w=lambda u: 1 / (1 + u * u), f2=lambda r: r)
    head = ts.assemble_and_solve(with_split(p, "head_all"))
    tail = ts.assemble_and_solve(with_split(p, "tail_all"))
    for rep, pp in ((head, with_split(p, "head_all")), (tail, with_split(p, "tail_all"))):
        assert max(v[0] for v in ts.triple_residual(pp, rep).values()) <= 1e-6
    scale = max(abs(v) for v in head.psi.table.values())
    assert max(abs(head.psi.table[k] - tail.psi.table[k]) for k in head.psi.table) <= 1e-6 * scale


def test_phi_of_zero_data():
    p = base()
    assert ts.compute_phi1(p, 3, zero) == 0.0
    assert ts.compute_phi2(p, -3, zero) == 0.0


def test_phi1_forms_agree():
    p = ts.example2_problem(Q)
    for k in range(0, 12):
        direct = ts.compute_phi1(p, k)
        assert ts.compute_phi1_fractional(p, k) == pytest.approx(direct, rel=1e-9)
        if k > 0:  # at x = 1 the printed variant coincides
            printed = ts.compute_phi1_fractional(p, k, printed=True)
            assert abs(printed - direct) > 1e-3 * abs(direct)


def test_phi2_forms_agree():
    p = base(nu=0.5, alpha=0.5)
    g2 = lambda r: r**-2.0  # noqa: E731
    for k in range(1, -10, -1):
        direct = ts.compute_phi2(p, k, g2)
        assert ts.compute_phi2_kober(p, k, g2) == pytest.approx(direct, rel=1e-9)
        assert abs(ts.compute_phi2_kober(p, k, g2, printed=True) - direct) > 1e-3 * abs(direct)
        assert abs(ts.compute_phi2(p, k, g2, printed=True) - direct) > 1e-3 * abs(direct)


def test_phi2_weighted_is_bounded():
    p = base(nu=0.5, alpha=0.5)
    g2 = lambda r: r**-2.0  # noqa: E731
    vals = [abs((Q**k) ** (-p.nu - p.alpha) * ts.compute_phi2(p, k, g2)) for k in range(1, -30, -1)]
    assert all(math.isfinite(v) for v in vals)
    assert max(vals[15:]) <= max(vals[:15])


def test_example2_C1_head_term(example2):
    # the Phi1 part of C1 is the sine term times (1-q)^-2
    p, rep = example2
    q, al, nu = p.q, p.alpha, p.nu
    G = qgamma(0.5, q * q)
    phi = {int(k): v for k, v in rep.phi1.table.items()}
    for k in range(-3, 8):
        u = q**k
        head = (1 - q) ** -2 * u ** (1 - al) * (1 - q) * math.fsum(
            (q**e) ** 2 * v * lattice_bessel(nu - al, k + e, q) for e, v in phi.items())
        printed = (1 - q) * (1 - q * q) / G**2 * qtrig("sin", p.b * u / (1 - q), q) / u
        assert head == pytest.approx(printed / (1 - q) ** 2, rel=1e-7)


# ------------------------------------------------------------- kernels and right sides


def test_kernels_vanish_without_weight():
    p = base()
    for r, x in ((-1, -3), (2, 5)):
        assert ts.kernel_K1(p, r, x) == 0.0
        assert ts.kernel_K2(p, r, x) == 0.0
    sysm = ts.assemble(p)
    assert not sysm.K1.any() and not sysm.K2.any()


def test_kernels_are_symmetric():
    p = base(w=lambda u: 1 / (1 + u * u))
    sysm = ts.assemble(p)
    assert np.array_equal(sysm.K1, sysm.K1.T)
    assert np.array_equal(sysm.K2, sysm.K2.T)
    assert ts.kernel_K1(p, -1, -4) == ts.kernel_K1(p, -4, -1)


@pytest.mark.parametrize("which,order,pts", [("K1", 0.0, (-1, -4)), ("K2", 1.0, (3, 6))])
def test_kernel_with_unit_weight_against_direct_sum(which, order, pts):
    p = base(w=lambda u: 1.0)
    r, x = pts
    direct = 0.5 * (1 - Q) * math.fsum(
        (Q**k) ** 2 * lattice_bessel(order, k + x, Q) * lattice_bessel(order, k + r, Q)
        for k in range(-200, 400))
    kern = ts.kernel_K1 if which == "K1" else ts.kernel_K2
    assert kern(p, r, x) == pytest.approx(direct, rel=1e-9, abs=1e-15)


def test_right_sides_vanish_for_zero_data():
    p = base(w=lambda u: 0.5)
    assert ts.rhs_F(p, "F1", -1) == 0.0
    assert ts.rhs_F(p, "F2", 2) == 0.0


def test_example2_inhomogeneity():
    # corrected second term: (1-q)^(1/2)(1+q)^(3/2) G^-3 sqrt(rho) int_0^b dx/(q x^2 - rho^2)
    p = ts.example2_problem(Q)
    sysm = ts.assemble(p)
    G = qgamma(0.5, Q * Q)
    for k, F in zip(p.grid2[:15], sysm.F2vec[:15]):
        r = Q**k
        integral = (1 - Q) * math.fsum(Q**e / (Q * Q ** (2 * e) - r * r) for e in range(p.m_b, 2000))
        corrected = math.sqrt(1 - Q) * (1 + Q) ** 1.5 / G**3 * math.sqrt(r) * integral
        assert F == pytest.approx(corrected, rel=1e-7)
        window = (1 - Q) * math.fsum(Q**e / (Q * Q ** (2 * e) - r * r) for e in range(p.m_b, int(k)))
        printed = (1 + Q) ** 1.5 / math.sqrt(1 - Q) / G**3 * math.sqrt(r) * window
        assert abs(printed - F) > 1e-2 * abs(F)


# ------------------------------------------------------------- solve


def test_zero_problem():
    p = base(w=lambda u: 0.5)
    rep = ts.assemble_and_solve(p)
    assert not any(rep.psi1.table.values()) and not any(rep.psi.table.values())
    assert all(v[0] == 0.0 for v in ts.triple_residual(p, rep).values())


def test_reconstruction_invariant():
    p = base(w=lambda u: 1 / (1 + u * u), f2=lambda r: 1.0)
    rep = ts.assemble_and_solve(p)
    for k, v in rep.psi.table.items():
        u = Q**k
        expect = u ** (2 * p.alpha) * (rep.C1.table[k] + rep.C2.table[k]) / (1 + p.w(u))
        assert v == expect


@pytest.mark.parametrize("w", [zero, lambda u: 0.5, lambda u: 1 / (1 + u * u)],
                         ids=["zero", "half", "lorentz"])
def test_manufactured_solution(w):
    p, planted = ts.manufactured_problem(Q, 0.5, 0.5, w)
    rep = ts.assemble_and_solve(p)
    scale = max(abs(v) for v in planted.values())
    err = max(abs(rep.psi.table.get(k, 0.0) - planted.get(k, 0.0)) for k in rep.psi.table)
    assert err <= 1e-6 * scale
    assert max(v[0] for v in ts.triple_residual(p, rep).values()) <= 1e-6


def test_variant_audit_selects_derived():
    p, planted = ts.manufactured_problem(Q, 0.5, 0.5, lambda u: 1 / (1 + u * u))
    audit = ts.audit_variants(p, planted)
    assert audit["winner"] == "derived"
    for name, row in audit["rows"].items():
        if name != "derived":
            assert row["residual"] > 1e-2


def test_intermediate_identities():
    p = with_split(base(w=lambda u: 1 / (1 + u * u), f2=lambda r: r), "tail_all")
    rep = ts.assemble_and_solve(p)
    q, al, nu = p.q, p.alpha, p.nu

    def transform(C, order, x):
        return (1 - q) * math.fsum(q**k * (q**k) ** al * v * lattice_bessel(order, k + x, q)
                                   for k, v in C.table.items())

    def check(C, order, target, exps, tol):
        scale = max(abs(v) for v in target.table.values())
        for x in exps[:10]:
            assert abs(transform(C, order, int(x)) - target.table[int(x)]) <= tol * scale

    check(rep.C1, nu - al, rep.psi1, p.grid1, 1e-6)
    check(rep.C2, nu + al, rep.psi2, p.grid2, 1e-6)
    check(rep.C2, nu + al, rep.phi2, p.phi2_grid, 1e-7)


def test_intermediate_identity_phi1(example2):
    p, rep = example2
    q, al, nu = p.q, p.alpha, p.nu
    scale = max(abs(v) for v in rep.phi1.table.values())
    for x in p.phi1_grid[:10]:
        val = (1 - q) * math.fsum(q**k * (q**k) ** al * v * lattice_bessel(nu - al, k + int(x), q)
                                  for k, v in rep.C1.table.items())
        assert abs(val - rep.phi1.table[int(x)]) <= 1e-7 * scale


def test_remark_boundedness(example2):
    p, rep = example2
    al, nu = p.alpha, p.nu
    for table, power in ((rep.phi1.table, al - nu), (rep.psi1.table, al - nu), (rep.psi2.table, -nu - al)):
        vals = [abs((Q**k) ** power * v) for k, v in sorted(table.items(), key=lambda kv: abs(kv[0]))]
        assert all(math.isfinite(v) for v in vals)
        half = len(vals) // 2
        assert max(vals[half:]) <= max(vals[:half]) * (1 + 1e-9)


def test_solution_space_sums_are_stable(example2):
    # above the rounding floor (u <= q^-8) the weighted sums settle as the grids grow
    p, rep = example2
    big = ts.assemble_and_solve(replace(p, M=50, N=50))
    for wt in (p.nu, p.nu - 2 * p.alpha):
        sums = [(1 - Q) * math.fsum(Q**k * (Q**k) ** wt * abs(v) for k, v in r.psi.table.items() if k >= -8)
                for r in (rep, big)]
        assert math.isfinite(sums[0]) and sums[1] == pytest.approx(sums[0], rel=1e-6)


# ------------------------------------------------------------- Example 2


def test_example2_residuals(example2):
    p, rep = example2
    res = ts.triple_residual(p, rep)
    assert max(v[0] for v in res.values()) <= 1e-5


def test_example2_corrected_relations(example2):
    p, rep = example2
    rel = ts.example2_relations(p, rep)
    assert rel["Eq1"] <= 1e-6 and rel["Eq2"] <= 1e-6


def test_example2_printed_relations_fail(example2):
    p, rep = example2
    rel = ts.example2_relations(p, rep, printed=True)
    assert rel["Eq1"] > 1e-2 and rel["Eq2"] > 1e-2


def test_example2_relations_need_the_example_parameters():
    p = base(w=lambda u: 0.5)
    with pytest.raises(ts.TripleError):
        ts.example2_relations(p, ts.assemble_and_solve(p))


def test_window_guards():
    p = ts.example2_problem(Q)
    with pytest.raises(ts.ConditioningError):
        ts.assemble_and_solve(p, cond_limit=1.0)
    with pytest.raises(ts.WindowError):
        ts.assemble_and_solve(p, trunc_tol=0.0)
