import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from cfleo.channel import nakagami_pdf
from cfleo.errors import NumericalError, ParameterError
from cfleo.specfun import (SeriesControl, kummer_phi, ln_gamma, nakagami_laplace,
                           parabolic_cylinder_neg2m, pcf_scaled)

mp.mp.dps = 40


def test_ln_gamma_values():
    assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)
    assert ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-15)
    m = 2.0
    dup = ln_gamma(m) + ln_gamma(m + 0.5) + (2 * m - 1) * math.log(2) - 0.5 * math.log(math.pi)
    assert ln_gamma(2 * m) == pytest.approx(math.log(6.0), rel=1e-15)
    assert ln_gamma(2 * m) == pytest.approx(dup, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.5])
def test_ln_gamma_domain(x):
    with pytest.raises(ParameterError):
        ln_gamma(x)


def test_kummer_trivial_values():
    assert kummer_phi(1.3, 2.7, 0.0) == 1.0
    z = 0.7
    assert kummer_phi(1.0, 2.0, z) == pytest.approx(math.expm1(z) / z, rel=1e-12)


def _exact_series(a, b, z, terms):
    total, term = Fraction(1), Fraction(1)
    for n in range(terms):
        term = term * (a + n) * z / ((b + n) * (n + 1))
        total += term
    return float(total)


def test_kummer_against_rational_series():
    ref = _exact_series(Fraction(2), Fraction(1, 2), Fraction(16, 5), 200)
    assert kummer_phi(2.0, 0.5, 3.2) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a,b,z", [
    (0.5, 0.5, 12.0), (2.0, 0.5, 29.5), (1.5, 1.5, 30.5), (3.0, 0.5, 80.0),
    (1.0, 1.5, 200.0), (2.5, 0.5, -40.0), (0.7, 2.2, -5.0), (4.0, 1.5, 45.0),
])
def test_kummer_real_against_mpmath(a, b, z):
    ref = float(mp.hyp1f1(a, b, z))
    assert kummer_phi(a, b, z) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("z", [3 + 4j, 20 - 15j, 0.5 + 40j, 35 + 2j, -8 + 3j])
def test_kummer_complex_against_mpmath(z):
    a, b = 1.5, 0.5
    ref = complex(mp.hyp1f1(a, b, z))
    assert abs(kummer_phi(a, b, z) - ref) <= 1e-9 * abs(ref)


def test_kummer_recurrence():
    rng = np.random.default_rng(20)
    for _ in range(40):
        a = rng.uniform(1.0, 4.0)
        b = rng.uniform(0.3, 3.0)
        z = rng.uniform(-20.0, 60.0)
        lhs = kummer_phi(a, b, z)
        rhs = kummer_phi(a - 1, b, z) + z / b * kummer_phi(a, b + 1, z)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_kummer_nonconvergence_carries_partial():
    with pytest.raises(NumericalError) as exc:
        kummer_phi(1.0, 1.0, 10.0, SeriesControl(max_terms=3))
    assert exc.value.partial is not None
    assert float(np.real(np.ravel(exc.value.partial)[0])) == pytest.approx(1 + 10 + 50 + 1000 / 6)


def test_kummer_rejects_nonpositive_integer_b():
    with pytest.raises(ParameterError):
        kummer_phi(1.0, -2.0, 1.0)


def test_series_control_validation():
    with pytest.raises(ParameterError):
        SeriesControl(rel_tol=0.0)
    with pytest.raises(ParameterError):
        SeriesControl(max_terms=0)


def test_pcf_known_values():
    assert parabolic_cylinder_neg2m(0.5, 0.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)
    for m in (0.5, 1.0, 2.5, 4.0):
        ref = 2.0 ** (-m) * math.sqrt(math.pi) / math.gamma(m + 0.5)
        assert parabolic_cylinder_neg2m(m, 0.0) == pytest.approx(ref, rel=1e-13)


def test_pcf_against_integral_representation():
    m, z = 1.0, 1.5
    nu = 2 * m
    val, _ = integrate.quad(lambda t: t ** (nu - 1) * math.exp(-t * t / 2 - z * t), 0, np.inf,
                            epsabs=0, epsrel=1e-13)
    ref = math.exp(-z * z / 4) * val / math.gamma(nu)
    assert parabolic_cylinder_neg2m(m, z) == pytest.approx(ref, rel=1e-8)


def test_pcf_rejects_small_m():
    with pytest.raises(ParameterError):
        parabolic_cylinder_neg2m(0.4, 1.0)


@pytest.mark.parametrize("nu", [1.0, 2.0, 4.0, 8.0])
def test_scaled_pcf_on_rays(nu):
    # rays through the series, walk and asymptotic regions of the right half-plane
    for theta in (0.0, 0.6, 1.2, 1.5, -1.0, math.pi / 2):
        for rho in (0.3, 1.9, 2.5, 5.0, 9.0, 14.0, 30.0):
            z = rho * complex(math.cos(theta), math.sin(theta))
            ref = complex(mp.exp(mp.mpc(z) ** 2 / 4) * mp.pcfd(-nu, z))
            got = pcf_scaled(nu, z)
            assert abs(got - ref) <= 1e-9 * abs(ref), (nu, z)


def test_pcf_vectorized_matches_scalar():
    z = np.array([0.5, 3.0 + 1.0j, 12.0 - 7.0j, 40.0j])
    vec = pcf_scaled(4.0, z)
    for zi, vi in zip(z, vec):
        assert pcf_scaled(4.0, zi) == vi


def test_pcf_deterministic():
    z = np.linspace(0.0, 20.0, 64) * np.exp(0.7j)
    a = pcf_scaled(3.0, z)
    b = pcf_scaled(3.0, z)
    assert a.tobytes() == b.tobytes()


def test_nakagami_laplace_at_zero():
    for m in (0.5, 1.0, 3.0):
        assert nakagami_laplace(0.0, m) == pytest.approx(1.0, rel=1e-13)


def test_nakagami_laplace_rayleigh_closed_form():
    # m = 1: E[exp(-t R)] for Rayleigh with E[R^2] = 1
    for t in (0.1, 1.0, 4.0, 12.0):
        ref = 1 - t * math.sqrt(math.pi) / 2 * math.exp(t * t / 4) * math.erfc(t / 2)
        assert nakagami_laplace(t, 1.0) == pytest.approx(ref, rel=1e-9)


def test_nakagami_laplace_matches_quadrature_random():
    rng = np.random.default_rng(21)
    for _ in range(25):
        m = rng.uniform(0.5, 4.0)
        omega = rng.uniform(0.5, 2.0)
        t = rng.uniform(0.0, 10.0)
        val, _ = integrate.quad(lambda x: math.exp(-t * x) * nakagami_pdf(x, m, omega), 0, np.inf,
                                epsabs=0, epsrel=1e-12, limit=200)
        assert nakagami_laplace(t, m, omega) == pytest.approx(val, rel=1e-8)


def test_nakagami_laplace_complex_argument():
    m, t = 2.0, 3.0 + 5.0j
    ref = mp.quad(lambda x: mp.exp(-t * x) * 2 * m ** m / mp.gamma(m) * x ** (2 * m - 1)
                  * mp.exp(-m * x * x), [0, 2, 6, mp.inf])
    assert abs(nakagami_laplace(t, m) - complex(ref)) < 1e-10
