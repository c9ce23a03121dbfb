"""Independent reference computations shared by the tests."""

from __future__ import annotations

import math


def partial_sum_2f1_at_1(a: complex, b: complex, c: complex, terms: int = 10_000) -> complex:
    """2F1(a, b; c; 1) from partial sums with the known algebraic tail removed.

    The terms decay like k^(a+b-c-1), so the tail after N terms behaves as
    C N^-p with p = Re(c - a - b); two partial sums eliminate C.
    """
    a, b, c = complex(a), complex(b), complex(c)
    term, total = 1 + 0j, 1 + 0j
    half = terms // 2
    s_half = None
    for k in range(terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1))
        total += term
        if k + 1 == half:
            s_half = total
    p = (c - a - b).real
    n1, n2 = half + 1, terms + 1
    w1, w2 = n1**p, n2**p
    return (w2 * total - w1 * s_half) / (w2 - w1)


def pseudospin_closed_form(alpha: float, n: int, D: int, M: float = 1.0, C: float = 1.0) -> tuple[float, float]:
    """Roots of (M+E)(M-E+C) + (alpha^2/4)(2n+D-1)^2 = 0 (V0 = S0)."""
    k = alpha**2 / 4 * (2 * n + D - 1) ** 2
    # -E^2 + C E + M(M+C) + k = 0
    disc = math.sqrt(C * C + 4 * (M * (M + C) + k))
    return (C - disc) / 2, (C + disc) / 2


def scarf_nu_closed_form(gamma: float, eta: float, n_r: int) -> float:
    return 0.5 * (2 * (2 * n_r + 1) + math.sqrt(1 + 4 * gamma) + math.sqrt(1 + 4 * eta))
