import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtriple.qlattice import (DivergenceError, DomainError, LatticeError, LatticeFunction,
                              NoLimitError, QLattice, jackson_integral, q_derivative, rebase_q2)
from qtriple.qspecial import lattice_bessel

LAT = QLattice(0.5, 1.0, 60, 60)


def fn(f, decay="power"):
    return LatticeFunction(func=f, decay=decay)


def test_lattice_points_decrease_and_slices():
    lat = QLattice(0.5, 2.0, 3, 4)
    pts = lat.points
    assert all(a > b for a, b in zip(pts, pts[1:]))
    assert list(lat.slice_B()) == [-3, -2, -1]
    assert list(lat.slice_A()) == [0, 1, 2, 3, 4]
    assert lat.exponent_of(2.0 * 0.5**3) == 3


@pytest.mark.parametrize("kw", [dict(q=1.0, t=1.0, n_neg=1, n_pos=1),
                                dict(q=0.5, t=0.0, n_neg=1, n_pos=1),
                                dict(q=0.5, t=1.0, n_neg=-1, n_pos=1)])
def test_lattice_rejects_bad_parameters(kw):
    with pytest.raises(LatticeError):
        QLattice(**kw)


def test_off_lattice_point_is_a_domain_error():
    with pytest.raises(DomainError):
        LAT.exponent_of(0.3)
    with pytest.raises(DomainError):
        jackson_integral(fn(lambda t: 1.0), "zero_to_x", 0.3, LAT)


def test_tabulated_function_refuses_extrapolation():
    lat = QLattice(0.5, 1.0, 2, 2)
    f = LatticeFunction.from_values(lat, [-2, -1, 0, 1, 2], [1, 2, 3, 4, 5])
    assert f(0.25) == 5
    with pytest.raises(DomainError):
        f.at(3)


def test_head_integral_of_one_is_one():
    assert jackson_integral(fn(lambda t: 1.0), "zero_to_x", 1.0, LAT) == pytest.approx(1.0, abs=1e-15)


def test_head_integral_of_t():
    # (1-q) sum q^(2k) = 1/(1+q)
    assert jackson_integral(fn(lambda t: t), "zero_to_x", 1.0, LAT) == pytest.approx(2 / 3, rel=1e-14)


def test_tail_integral_of_cubic_decay():
    oracle = 0.16666666666666666  # 200-term sum in 40 digits
    val = jackson_integral(fn(lambda t: t**-3.0), "x_to_inf", 1.0, LAT)
    assert val == pytest.approx(oracle, rel=1e-12)


def test_growing_tail_is_divergent():
    with pytest.raises(DivergenceError):
        jackson_integral(fn(lambda t: t), "x_to_inf", 1.0, LAT)


def test_improper_range_needs_decay_tag():
    with pytest.raises(DivergenceError):
        jackson_integral(fn(lambda t: t**-3.0, "none"), "x_to_inf", 1.0, LAT)


@given(st.integers(-5, 5))
def test_splitting_identity(k):
    f = fn(lambda t: t**-2.5 / (1 + t))
    x = 0.5**k
    left = jackson_integral(f, "x_to_inf", 0.5 * x, LAT)
    right = jackson_integral(f, "x_to_inf", x, LAT) + x * 0.5 * f(x)
    assert left == pytest.approx(right, rel=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_and_positivity(a, b):
    f, g = (lambda t: t / (1 + t**3)), (lambda t: t**2 / (1 + t**4))
    h = fn(lambda t: a * f(t) + b * g(t))
    If = jackson_integral(fn(f), "zero_to_inf", lat=LAT)
    Ig = jackson_integral(fn(g), "zero_to_inf", lat=LAT)
    assert If > 0 and Ig > 0
    assert jackson_integral(h, "zero_to_inf", lat=LAT) == pytest.approx(a * If + b * Ig, abs=1e-13)


def test_window_growth_is_within_error_estimate():
    f = fn(lambda t: t / (1 + t**3))
    small, err = jackson_integral(f, "zero_to_inf", lat=QLattice(0.5, 1.0, 30, 30), return_error=True)
    big = jackson_integral(f, "zero_to_inf", lat=QLattice(0.5, 1.0, 80, 80))
    assert abs(big - small) <= max(err, 1e-15)


def test_q_derivative_examples():
    assert q_derivative(lambda t: t * t, 1.0, 0.5) == pytest.approx(1.5, rel=1e-15)
    assert q_derivative(lambda t: 7.0, 0.3, 0.5) == 0.0


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
def test_q_derivative_matches_relation_b(nu):
    q = 0.5
    for k in range(-3, 6):
        z = q**k
        d = q_derivative(lambda s: s**nu * _J(nu, s, q), z, q)
        assert d == pytest.approx(z**nu / (1 - q) * lattice_bessel(nu - 1, k, q), rel=1e-9)


def _J(nu, s, q):
    return lattice_bessel(nu, round(math.log(s) / math.log(q)), q)


def test_q_derivative_at_zero():
    assert q_derivative(lambda t: 3 * t + t * t, 0.0, 0.5) == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(NoLimitError):
        q_derivative(lambda t: math.sqrt(t), 0.0, 0.5)


def test_rebase_round_trip_and_constants():
    lat = QLattice(0.5, 1.0, 3, 3)
    f = LatticeFunction.from_values(lat, range(-3, 4), [float(k) for k in range(-3, 4)])
    back = rebase_q2(rebase_q2(f, "to_q2"), "from_q2")
    assert back.table == f.table and back.lattice == lat
    one = rebase_q2(fn(lambda t: 1.0), "to_q2")
    assert one(0.0625) == 1.0


def test_rebase_tail_integral():
    q = 0.6
    lat, lat2 = QLattice(q, 1.0, 80, 80), QLattice(q * q, 1.0, 80, 80)
    direct = jackson_integral(fn(lambda t: t**-3.0), "x_to_inf", 1.0, lat)
    F = rebase_q2(fn(lambda t: t**-3.0), "to_q2")
    via = jackson_integral(fn(lambda s: F(s) / math.sqrt(s)), "x_to_inf", 1.0, lat2) / (1 + q)
    assert via == pytest.approx(direct, rel=1e-12)


def test_rebase_derivative_chain_rule():
    q = 0.5
    left = q_derivative(lambda r: r**4, 1.0, q)
    right = 1.0 * (1 + q) * q_derivative(lambda s: s * s, 1.0, q * q)
    assert left == right
