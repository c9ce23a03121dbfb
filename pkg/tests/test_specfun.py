import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_jacobi

from scarfdirac.specfun import (
    DivergentSeries,
    PoleError,
    gauss_2f1_at_1,
    jacobi,
    jacobi_binomial,
    jacobi_derivative,
    jacobi_recurrence,
    jacobi_series,
    log_gamma,
    pochhammer,
)
from .oracles import partial_sum_2f1_at_1


@pytest.mark.parametrize("n,a,b,x", [(0, 0.5, 1.5, 0.3), (3, 0.5, 1.5, 0.3), (7, -0.3, 2.2, -0.8), (12, 4.0, 0.25, 0.95)])
def test_jacobi_matches_scipy(n, a, b, x):
    ref = eval_jacobi(n, a, b, x)
    assert jacobi(n, a, b, x).real == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_jacobi_binomial_form_for_integer_parameters():
    for n in range(6):
        for a in range(3):
            for b in range(3):
                for x in (-0.9, 0.1, 2.5):
                    assert jacobi_binomial(n, a, b, x) == pytest.approx(jacobi(n, a, b, x).real, rel=1e-12, abs=1e-12)


def test_jacobi_negative_degree_is_zero():
    assert jacobi(-1, 0.3, 0.2, 0.5) == 0
    assert jacobi_series(-1, 0.3, 0.2, 0.5) == 0


def test_jacobi_known_low_degree():
    # P_1^(a,b)(x) = (a+1) + (a+b+2)(x-1)/2
    a, b, x = 1.5 + 0.5j, -3.0, 0.4
    assert jacobi(1, a, b, x) == pytest.approx((a + 1) + (a + b + 2) * (x - 1) / 2)
    assert jacobi(0, a, b, x) == 1


def test_jacobi_accepts_arrays():
    x = np.linspace(-1, 3, 7)
    out = jacobi(4, 0.5, -2.5, x)
    assert out.shape == x.shape
    assert np.allclose(out, [jacobi(4, 0.5, -2.5, xi) for xi in x])


def test_jacobi_check_flag_runs_both_routes():
    jacobi(10, 2.0 + 1.0j, -7.3, 1.7, check=True)


def test_recurrence_falls_back_on_singular_step():
    # a + b = -3 makes 2m(m+a+b)(s-2) vanish at m = 3
    a, b, x = -1.0, -2.0, 0.4
    assert jacobi_recurrence(4, a, b, x) == pytest.approx(jacobi_series(4, a, b, x), abs=1e-12)


complex_param = st.builds(complex, st.floats(-40, 40), st.floats(-5, 5))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(0, 30), a=complex_param, b=complex_param, x=st.floats(-1.5, 1e3))
def test_series_and_recurrence_agree(n, a, b, x):
    rec = jacobi_recurrence(n, a, b, x)
    ser = jacobi_series(n, a, b, x)
    scale = max(1.0, abs(rec), abs(ser))
    assert abs(rec - ser) <= 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), a=st.floats(-20, 20), b=st.floats(-60, 5), x=st.floats(-0.9, 30))
def test_derivative_identity_against_finite_differences(n, a, b, x):
    h = 1e-5 * max(1.0, abs(x))
    fd = (jacobi(n, a, b, x + h) - jacobi(n, a, b, x - h)) / (2 * h)
    d = jacobi_derivative(n, a, b, x)
    # central-difference truncation is O(h^2) relative to the third derivative
    h3 = (jacobi(n, a, b, x + 2 * h) - 2 * jacobi(n, a, b, x + h) + 2 * jacobi(n, a, b, x - h) - jacobi(n, a, b, x - 2 * h)) / (2 * h**3)
    allowance = 1e-8 * max(1.0, abs(d)) + abs(h3) * h * h
    assert abs(d - fd) <= allowance


@pytest.mark.parametrize("z", [1.0, 2.0, 0.5, 10.5, 0.1 + 2j, -0.5, -3.7 + 0.2j, 171.3, 1e-3])
def test_log_gamma_matches_mpmath(z):
    ref = complex(mpmath.loggamma(z))
    assert abs(log_gamma(z) - ref) <= 1e-13 * max(1.0, abs(ref))


@settings(max_examples=80)
@given(re=st.floats(-30, 50), im=st.floats(-30, 30))
def test_log_gamma_property(re, im):
    z = complex(re, im)
    if abs(im) < 1e-6 and re <= 0 and abs(re - round(re)) < 1e-6:
        return
    ref = complex(mpmath.loggamma(z))
    got = log_gamma(z)
    assert abs(cmath.exp(got - ref) - 1) <= 1e-11


@pytest.mark.parametrize("z", [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)


def test_pochhammer():
    assert pochhammer(3, 4) == 3 * 4 * 5 * 6
    assert pochhammer(-2, 3) == 0
    assert pochhammer(0.5, 0) == 1


def test_gauss_2f1_simple_values():
    assert gauss_2f1_at_1(1, 1, 3) == pytest.approx(2.0)
    assert gauss_2f1_at_1(0, 2, -0.5) == 1
    # Chu-Vandermonde: 2F1(-n, b; c; 1) = (c-b)_n / (c)_n
    n, b, c = 4, 1.3, 2.7
    assert gauss_2f1_at_1(-n, b, c) == pytest.approx(pochhammer(c - b, n) / pochhammer(c, n), rel=1e-13)


def test_gauss_2f1_divergent_and_poles():
    with pytest.raises(DivergentSeries):
        gauss_2f1_at_1(1, 1, 2)
    with pytest.raises(DivergentSeries):
        gauss_2f1_at_1(0.5 + 1j, 2, 1.5)
    with pytest.raises(PoleError):
        gauss_2f1_at_1(0.5, 0.25, -2)
    assert gauss_2f1_at_1(-1.5, 3, 2) == 0  # c - b a non-positive integer, Re(c-a-b) > 0


@pytest.mark.parametrize(
    "a,b,c",
    [(0.3, 0.7, 4.1), (1.2, -0.4, 3.3), (0.5 + 0.5j, 0.25, 3.0), (2.0, 1.0, 5.5), (-1.5, 2.0, 2.5), (0.1, 0.2, 1.9)],
)
def test_gauss_2f1_against_partial_sums(a, b, c):
    ref = partial_sum_2f1_at_1(a, b, c, terms=10_000)
    got = gauss_2f1_at_1(a, b, c)
    assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))
