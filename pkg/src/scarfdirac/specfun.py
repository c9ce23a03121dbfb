"""Special functions with complex parameters.

Jacobi polynomials are evaluated two ways (finite hypergeometric sum and the
three-term recurrence) because the bound-state parameters are far outside the
classical a, b > -1 range: one of them is -nu, a large negative number.
"""

from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np

from .core import ScarfError


class PoleError(ScarfError, ArithmeticError):
    """Gamma function evaluated at a non-positive integer."""


class DivergentSeries(ScarfError, ArithmeticError):
    """Gauss series at unit argument with Re(c - a - b) <= 0."""


_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _nonpositive_integer(z: complex, tol: float = 0.0) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real <= 0 and abs(z.real - round(z.real)) <= tol


def _lanczos_log_gamma(z: complex) -> complex:
    z = z - 1
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z).

    Lanczos (g=7, 9 terms) for Re z >= 1/2; left of that the recurrence
    log Gamma(z) = log Gamma(z+m) - sum log(z+k) keeps the branch continuous off
    the negative real axis.
    """
    z = complex(z)
    if _nonpositive_integer(z):
        raise PoleError(f"log_gamma pole at z={z.real:g}")
    if z.real >= 0.5:
        return _lanczos_log_gamma(z)
    m = math.ceil(0.5 - z.real)
    shift = 0j
    for k in range(m):
        shift += cmath.log(z + k)
    return _lanczos_log_gamma(z + m) - shift


def pochhammer(a: complex, k: int) -> complex:
    """Rising factorial (a)_k."""
    out = 1 + 0j
    for j in range(k):
        out *= a + j
    return out


def jacobi_series(n: int, a: complex, b: complex, x: complex) -> complex:
    """P_n^(a,b)(x) from the terminating 2F1 sum, in extended precision.

    Gamma ratios are written as rising factorials so that no Gamma pole is ever
    touched.  The alternating sum cancels badly inside [-1, 1] for large n, so it
    is accumulated with mpmath at 30 + 2n digits.
    """
    if np.ndim(x) > 0:
        flat = [jacobi_series(n, a, b, xi) for xi in np.ravel(x)]
        return np.asarray(flat, dtype=complex).reshape(np.shape(x))
    if n < 0:
        return 0j
    with mpmath.workdps(30 + 2 * n):
        a_, b_, x_ = mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(x)
        y = (x_ - 1) / 2
        total = mpmath.mpc(0)
        for m in range(n + 1):
            coef = mpmath.binomial(n, m) / mpmath.factorial(n)
            total += coef * mpmath.rf(a_ + m + 1, n - m) * mpmath.rf(a_ + b_ + n + 1, m) * y**m
        return complex(total)


_EPS = np.finfo(float).eps
_RECURRENCE_RTOL = 1e-11
_BENIGN_GROWTH = 1e4


def _recurrence_steps(n, a, b, x, one, track_error):
    """Forward recurrence in whatever arithmetic ``one`` carries.

    With ``track_error`` a first-order bound on the accumulated rounding error
    is propagated alongside (double precision only).
    """
    p_prev = x * 0 + one
    p = (a + 1) + (a + b + 2) * (x - 1) / 2
    err_prev = 0.0
    err = 4 * _EPS * (abs(a + 1) + np.abs((a + b + 2) * (x - 1) / 2)) if track_error else None
    last = err
    inputs = np.abs(p) + 1 if track_error else None
    for m in range(2, n + 1):
        s = 2 * m + a + b
        denom = 2 * m * (m + a + b) * (s - 2)
        if denom == 0:
            return None, None, None
        A = (s - 1) * (s * (s - 2) * x + a * a - b * b) / denom
        B = 2 * (m + a - 1) * (m + b - 1) * s / denom
        tA, tB = A * p, B * p_prev
        p_prev, p = p, tA - tB
        if track_error:
            last = 4 * _EPS * (np.abs(tA) + np.abs(tB))
            inputs = np.abs(p_prev) + np.abs(p)
            err_prev, err = err, np.abs(A) * err + abs(B) * err_prev + last
    return p, err, (last, inputs)


def jacobi_recurrence(n: int, a: complex, b: complex, x: complex) -> complex:
    """P_n^(a,b)(x) by the three-term recurrence; falls back to the sum on a singular step.

    Outside the classical parameter range the forward recurrence can amplify
    rounding by many orders of magnitude.  A running error bound flags such
    points, which are then recomputed with the same recurrence in mpmath at a
    precision matched to the observed amplification.
    """
    if n < 0:
        return x * 0j
    if n == 0:
        return x * 0j + 1
    a, b = complex(a), complex(b)
    xa = np.asarray(x, dtype=complex)
    p, err, tail = _recurrence_steps(n, a, b, xa, 1 + 0j, track_error=True)
    if p is None:
        return jacobi_series(n, a, b, x)
    last, inputs = tail
    # rounding in a benign final step is unavoidable near a zero of P; error
    # carried over from earlier steps, or a final step that itself cancels
    # terms far larger than its inputs, signals an unstable recurrence
    benign = (err <= 16 * last) & (last <= _BENIGN_GROWTH * _EPS * inputs)
    bad = np.atleast_1d((err > _RECURRENCE_RTOL * np.abs(p)) & ~benign)
    if np.any(bad):
        p = np.array(p, dtype=complex, copy=True)
        flat_p, flat_err, flat_x = p.reshape(-1), np.atleast_1d(err).reshape(-1), xa.reshape(-1)
        for i in np.flatnonzero(bad):
            amplification = flat_err[i] / (_EPS * max(abs(flat_p[i]), 1e-300))
            dps = 20 + int(math.log10(max(amplification, 1.0))) + n
            with mpmath.workdps(dps):
                value, _, _ = _recurrence_steps(n, mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(flat_x[i]), mpmath.mpc(1), False)
            flat_p[i] = complex(value)
    return complex(p) if np.ndim(x) == 0 else p


def jacobi_binomial(n: int, a: int, b: int, x: float) -> float:
    """Binomial-sum form, integer parameters only (regression reference)."""
    if int(a) != a or int(b) != b or a < 0 or b < 0:
        raise ValueError("binomial form needs non-negative integer parameters")
    a, b = int(a), int(b)
    total = 0.0
    for p in range(n + 1):
        total += math.comb(n + a, p) * math.comb(n + b, n - p) * (x - 1) ** (n - p) * (x + 1) ** p
    return total / 2**n


def jacobi(n: int, a: complex, b: complex, x: complex, check: bool = False) -> complex:
    """P_n^(a,b)(x) for complex a, b and scalar or array x; negative degree gives zero.

    With ``check`` the recurrence value is compared with the series value and an
    AssertionError is raised when they differ by more than 1e-10 relative (scale
    taken as the larger magnitude, floored at 1).
    """
    value = jacobi_recurrence(n, a, b, x)
    if check and n <= 30:
        other = jacobi_series(n, a, b, x)
        scale = np.maximum(1.0, np.maximum(np.abs(value), np.abs(other)))
        assert np.all(np.abs(value - other) <= 1e-10 * scale), (n, a, b, x, value, other)
    return value


def jacobi_derivative(n: int, a: complex, b: complex, x: complex) -> complex:
    """d/dx P_n^(a,b)(x) = (a+b+n+1)/2 * P_{n-1}^(a+1,b+1)(x)."""
    if n <= 0:
        return x * 0j
    return 0.5 * (a + b + n + 1) * jacobi(n - 1, a + 1, b + 1, x)


def _terminating_degree(a: complex) -> int | None:
    if _nonpositive_integer(a):
        return int(round(-complex(a).real))
    return None


def gauss_2f1_at_1(a: complex, b: complex, c: complex) -> complex:
    """2F1(a, b; c; 1).

    Terminating series (a or b a non-positive integer) are summed directly.
    Otherwise Gauss's formula Gamma(c)Gamma(c-a-b)/(Gamma(c-a)Gamma(c-b)) is used
    in log space; the series diverges for Re(c - a - b) <= 0.
    """
    a, b, c = complex(a), complex(b), complex(c)
    degree = _terminating_degree(a)
    other = _terminating_degree(b)
    if degree is None or (other is not None and other < degree):
        degree = other
    if degree is not None:
        term = 1 + 0j
        total = term
        for k in range(degree):
            if c + k == 0:
                raise PoleError(f"2F1 denominator vanishes at c={c}")
            term *= (a + k) * (b + k) / ((c + k) * (k + 1))
            total += term
        return total
    if _nonpositive_integer(c):
        raise PoleError(f"2F1 undefined for c={c}")
    if (c - a - b).real <= 0:
        raise DivergentSeries(f"2F1 at 1 diverges: Re(c-a-b) = {(c - a - b).real:g}")
    if _nonpositive_integer(c - a) or _nonpositive_integer(c - b):
        return 0j
    return cmath.exp(log_gamma(c) + log_gamma(c - a - b) - log_gamma(c - a) - log_gamma(c - b))
