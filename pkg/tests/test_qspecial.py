import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtriple.qspecial import (PoleError, bessel_bound, lattice_bessel, qbessel3, qbracket, qgamma,
                              qpochhammer, qpochhammer_lattice, qtrig)


def test_pochhammer_small_cases():
    assert all(qpochhammer(0.0, 0.5, n) == 1.0 for n in range(6))
    assert qpochhammer(0.5, 0.5, 2) == 0.375


def test_pochhammer_real_order_against_product_oracle():
    # 300-factor ratio of products in 40 digits
    q = 0.5
    val = qpochhammer(q * q * 0.25, q * q, -0.5)
    assert val == pytest.approx(1.0944217071034359, rel=1e-13)


@given(st.floats(-0.9, 0.9), st.integers(0, 12))
def test_pochhammer_integer_and_ratio_paths_agree(a, n):
    q = 0.6
    ratio = qpochhammer(a, q, math.inf) / qpochhammer(a * q**n, q, math.inf)
    assert qpochhammer(a, q, n) == pytest.approx(ratio, rel=1e-12, abs=1e-300)


def test_pochhammer_pole():
    with pytest.raises(PoleError):
        qpochhammer(0.5, 0.5, -1)  # (1; q)_1 in the denominator
    with pytest.raises(PoleError):
        qpochhammer(2.0, 0.25, 0.5)  # a q^0.5 = 1 exactly



def test_lattice_pochhammer_diagonal_zero():
    assert qpochhammer_lattice(0, 0.5, 0.5) == 0.0
    assert qpochhammer_lattice(3, 0.5, 0.5) == pytest.approx(qpochhammer(0.125, 0.5, 0.5), rel=1e-14)


def test_qgamma_normalisation_and_pole():
    for q in (0.3, 0.5, 0.7):
        assert qgamma(1.0, q) == pytest.approx(1.0, abs=1e-15)
        assert qgamma(2.0, q) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(PoleError):
        qgamma(-2.0, 0.5)


@pytest.mark.parametrize("z", [0.5, 1.5, 2.5])
def test_qgamma_functional_equation(z):
    q = 0.5
    bracket = (1 - q**z) / (1 - q)
    assert qgamma(z + 1, q) == pytest.approx(bracket * qgamma(z, q), rel=1e-12)


def test_qgamma_half_squared_oracle():
    assert qgamma(0.5, 0.25) ** 2 == pytest.approx(2.0212180981523981, rel=1e-12)


def test_qbracket():
    assert qbracket(0.7, 0, 0.5) == 1.0
    assert qbracket(2.0, 4, 0.5) == 0.0
    assert qbracket(4.0, 2, 0.5) == pytest.approx(2.1875, rel=1e-14)  # Gaussian binomial [4 2]


def test_bessel_examples():
    assert qbessel3(0.0, 0.0, 0.25) == 1.0
    assert qbessel3(1.0, 0.5, 0.25) == pytest.approx(0.60840674561536652, rel=1e-13)


def test_bessel_bound_c():
    for n in range(-6, 13):
        assert abs(lattice_bessel(1.0, n, 0.5)) <= bessel_bound(1.0, n, 0.5) * (1 + 1e-12)


def test_bessel_rejects_bad_orders():
    with pytest.raises(ValueError):
        qbessel3(-2.0, 0.5, 0.25)
    with pytest.raises(ValueError):
        qbessel3(0.5, -1.0, 0.25)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
def test_relation_a(q, nu):
    for k in range(-5, 15):
        z = q**k
        a, b = z**-nu * lattice_bessel(nu, k, q), (q * z) ** -nu * lattice_bessel(nu, k + 1, q)
        d = (a - b) / (z * (1 - q))
        right = -(q ** (1 - nu)) * z**-nu / (1 - q) * lattice_bessel(nu + 1, k + 1, q)
        # the difference quotient cannot beat eps * (|a| + |b|) where the two values cancel
        scale = max(abs(right), (abs(a) + abs(b)) / (z * (1 - q)))
        assert abs(d - right) <= 1e-9 * scale


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("nu", [0.5, 1.0, 2.5])
def test_relation_b(q, nu):
    for k in range(-5, 15):
        z = q**k
        a, b = z**nu * lattice_bessel(nu, k, q), (q * z) ** nu * lattice_bessel(nu, k + 1, q)
        right = z**nu / (1 - q) * lattice_bessel(nu - 1, k, q)
        scale = max(abs(right), (abs(a) + abs(b)) / (z * (1 - q)))
        assert abs((a - b) / (z * (1 - q)) - right) <= 1e-9 * scale


def test_lattice_bessel_matches_direct_call_in_float_range():
    q = 0.5
    for k in range(0, 10):
        assert lattice_bessel(0.5, k, q) == pytest.approx(qbessel3(0.5, q**k, q * q), rel=1e-15)


def test_qtrig():
    q = 0.5
    assert qtrig("sin", 0.0, q) == 0.0
    c = qpochhammer(q * q, q * q) / qpochhammer(q, q * q)
    arg = 1.0 * (1 - q)
    assert qtrig("sin", 1.0, q) == pytest.approx(c * math.sqrt(arg) * qbessel3(0.5, arg, q * q), rel=1e-13)
    for k in range(-8, 8):
        assert math.isfinite(qtrig("sin", q**k / (1 - q), q))
    with pytest.raises(ValueError):
        qtrig("tan", 1.0, q)
