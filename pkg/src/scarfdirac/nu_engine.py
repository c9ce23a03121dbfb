"""Generic Nikiforov-Uvarov (NU) reduction of hypergeometric-type equations.

An equation  psi'' + (tau_t/sigma) psi' + (sigma_t/sigma^2) psi = 0  with
deg sigma, deg sigma_t <= 2 and deg tau_t <= 1 is reduced by psi = phi(z) y(z)
to  sigma y'' + tau y' + lambda y = 0.  The linear function

    pi(z) = (sigma' - tau_t)/2 +- sqrt(((sigma' - tau_t)/2)^2 - sigma_t + k sigma)

exists only for the constants k that make the radicand a perfect square, and
the polynomial solutions require lambda = k + pi' to equal
lambda_n = -n tau' - n(n-1) sigma''/2.

Everything here is complex-valued: the Scarf problem carries i*epsilon in its
branches.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import ScarfError

_ZERO_TOL = 1e-14
_EPS = float(np.finfo(float).eps)
_UNDERFLOW = 1e-290


class NUError(ScarfError):
    pass


class InfiniteFamilyError(NUError):
    """Every k makes the radicand a perfect square; the caller must constrain k."""


class NoAdmissibleBranch(NUError):
    pass


class RepeatedRootError(NUError):
    """sigma has a double root; phi and rho are then exponentials of rationals."""


@dataclass(frozen=True)
class Poly:
    """Polynomial with complex coefficients, ascending degree, at most quadratic."""

    coefficients: tuple[complex, ...]

    def __init__(self, coefficients: Sequence[complex] = (0,)):
        coefs = [complex(c) for c in coefficients] or [0j]
        while len(coefs) > 1 and coefs[-1] == 0:
            coefs.pop()
        object.__setattr__(self, "coefficients", tuple(coefs))

    def __getitem__(self, i: int) -> complex:
        return self.coefficients[i] if i < len(self.coefficients) else 0j

    @property
    def degree(self) -> int:
        if len(self.coefficients) == 1 and self.coefficients[0] == 0:
            return -1
        return len(self.coefficients) - 1

    def __call__(self, z):
        out = 0j * z
        for c in reversed(self.coefficients):
            out = out * z + c
        return out

    def deriv(self) -> "Poly":
        return Poly([k * c for k, c in enumerate(self.coefficients)][1:] or [0])

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coefficients), len(other.coefficients))
        return Poly([self[i] + other[i] for i in range(n)])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly") -> "Poly":
        out = [0j] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return Poly(out)

    def scale(self, s: complex) -> "Poly":
        return Poly([s * c for c in self.coefficients])

    def roots(self) -> list[complex]:
        if self.degree <= 0:
            return []
        if self.degree == 1:
            return [-self[0] / self[1]]
        return list(_quadratic_roots(self[2], self[1], self[0]))


def _quadratic_roots(a: complex, b: complex, c: complex) -> tuple[complex, complex]:
    disc = cmath.sqrt(b * b - 4 * a * c)
    # pick the sign that avoids cancellation
    if (b.conjugate() * disc).real < 0:
        disc = -disc
    qq = -0.5 * (b + disc)
    if qq == 0:
        return 0j, 0j
    return qq / a, c / qq


@dataclass(frozen=True)
class NUProblem:
    sigma: Poly
    sigma_tilde: Poly
    tau_tilde: Poly

    def __post_init__(self):
        if self.sigma.degree > 2 or self.sigma_tilde.degree > 2 or self.tau_tilde.degree > 1:
            raise NUError("NU problem needs deg sigma, deg sigma_tilde <= 2 and deg tau_tilde <= 1")
        if self.sigma.degree < 0:
            raise NUError("sigma must not vanish identically")

    @cached_property
    def half_shift(self) -> Poly:
        """(sigma' - tau_tilde)/2."""
        return (self.sigma.deriv() - self.tau_tilde).scale(0.5)

    def radicand(self, nu_k: complex) -> Poly:
        return self.half_shift * self.half_shift - self.sigma_tilde + self.sigma.scale(nu_k)


@dataclass(frozen=True)
class PowerForm:
    """f(z) = exp(poly(z)) * prod (z - root_i)^exponent_i.

    Used for the weight rho and the factor phi.  For the z(1-z) family the two
    roots are 0 and 1; the factor (z - 1)^e differs from (1 - z)^e by a constant.
    """

    roots: tuple[complex, ...]
    exponents: tuple[complex, ...]
    exp_poly: Poly = field(default_factory=Poly)

    def exponent_at(self, root: complex) -> complex:
        for r, e in zip(self.roots, self.exponents):
            if abs(r - root) <= 1e-12 * max(1.0, abs(root)):
                return e
        raise KeyError(root)

    def log_derivative(self, z):
        out = self.exp_poly.deriv()(z)
        for r, e in zip(self.roots, self.exponents):
            out = out + e / (z - r)
        return out


@dataclass(frozen=True)
class NUBranch:
    nu_k: complex
    pi: Poly
    tau: Poly
    lam: complex
    sign: int
    degenerate: bool = False
    weight: PowerForm | None = None
    phi: PowerForm | None = None

    @property
    def tau_prime(self) -> complex:
        return self.tau[1]

    @property
    def weight_exponents(self) -> tuple[complex, ...] | None:
        return None if self.weight is None else self.weight.exponents

    @property
    def phi_exponents(self) -> tuple[complex, ...] | None:
        return None if self.phi is None else self.phi.exponents


def _k_equation_terms(problem: NUProblem) -> tuple[Poly, tuple[float, float, float]]:
    """Discriminant of the radicand as a polynomial in k (degree <= 2).

    Also returns, per coefficient, the magnitude of the products it is formed
    from; a coefficient below round-off of that magnitude is a cancellation
    to zero whatever the scale of the other coefficients.
    """
    shift = problem.half_shift
    P = shift * shift - problem.sigma_tilde
    s = problem.sigma
    c2 = s[1] ** 2 - 4 * s[2] * s[0]
    c1 = 2 * P[1] * s[1] - 4 * P[2] * s[0] - 4 * P[0] * s[2]
    c0 = P[1] ** 2 - 4 * P[2] * P[0]
    m2 = abs(s[1]) ** 2 + 4 * abs(s[2] * s[0])
    m1 = 2 * abs(P[1] * s[1]) + 4 * abs(P[2] * s[0]) + 4 * abs(P[0] * s[2])
    m0 = abs(P[1]) ** 2 + 4 * abs(P[2] * P[0])
    return Poly([c0, c1, c2]), (m0, m1, m2)


def _k_equation(problem: NUProblem) -> Poly:
    return _k_equation_terms(problem)[0]


def _negligible(c: complex, magnitude: float) -> bool:
    return abs(c) <= 64 * _EPS * magnitude


def _scale_of(*polys: Poly) -> float:
    return max([1.0] + [abs(c) for p in polys for c in p.coefficients])


def _square_root_poly(R: Poly) -> Poly:
    """Linear polynomial whose square is the (perfect-square) quadratic R.

    The root is taken of the larger end coefficient; the residual of the
    zero-discriminant condition then lands in the smaller one, where it is
    not amplified by a division.
    """
    A, B, C = R[2], R[1], R[0]
    scale = _scale_of(R)
    if abs(A) >= abs(C) and abs(A) > _ZERO_TOL * scale:
        rA = cmath.sqrt(A)
        return Poly([B / (2 * rA), rA])
    if abs(C) > _ZERO_TOL * scale:
        rC = cmath.sqrt(C)
        return Poly([rC, B / (2 * rC)])
    return Poly([0j])


def enumerate_branches(problem: NUProblem) -> list[NUBranch]:
    """All (k, +-) branches of pi(z).

    k solves the zero-discriminant condition of the radicand.  A double root in
    k is returned once with ``degenerate=True``; coinciding +- branches (zero
    square root) collapse to one.
    """
    try:
        return _enumerate_branches(problem)
    except OverflowError as exc:
        raise NUError(f"branch arithmetic overflows double precision: {exc}") from exc


def _enumerate_branches(problem: NUProblem) -> list[NUBranch]:
    # sigma -> l sigma, tau~ -> l tau~, sigma~ -> l^2 sigma~ leaves the equation
    # unchanged and scales k, pi, tau and lambda by l; a power of two keeps it exact
    exponent = math.frexp(max(abs(c) for c in problem.sigma.coefficients))[1]
    lam_scale, scaled = 1.0, problem
    if exponent < -1000:
        raise NUError("sigma coefficients are subnormal")
    if abs(exponent) > 20:
        lam_scale = 2.0**-exponent
        scaled = NUProblem(
            problem.sigma.scale(lam_scale), problem.sigma_tilde.scale(lam_scale).scale(lam_scale), problem.tau_tilde.scale(lam_scale)
        )
    keq, mags = _k_equation_terms(scaled)
    if not all(math.isfinite(m) for m in mags):
        raise NUError("k equation overflows double precision")
    if 0 < max(mags) < _UNDERFLOW:
        raise NUError("k equation underflows double precision")
    zero = [_negligible(keq[i], mags[i]) for i in range(3)]
    if all(zero):
        raise InfiniteFamilyError("radicand is a perfect square for every k")
    c0, c1, c2 = keq[0], keq[1], keq[2]
    if not zero[2]:
        k1, k2 = _quadratic_roots(c2, c1, c0)
        if abs(k1 - k2) <= 1e-12 * max(1.0, abs(k1)):
            ks, degenerate = [0.5 * (k1 + k2)], True
        else:
            ks, degenerate = sorted([k1, k2], key=lambda k: (k.real, k.imag)), False
    elif not zero[1]:
        ks, degenerate = [-c0 / c1], False
    else:
        return []

    if not all(cmath.isfinite(k) for k in ks):
        raise NUError("k overflows: sigma is too small relative to the other coefficients")
    back = 1.0 / lam_scale
    branches = []
    for k in ks:
        root = _square_root_poly(scaled.radicand(k))
        signs = (1,) if root.degree < 0 else (1, -1)
        for sign in signs:
            pi = scaled.half_shift + root.scale(sign)
            if back != 1.0:
                pi = pi.scale(back)
            tau = problem.tau_tilde + pi.scale(2)
            nu_k = k * back
            lam = nu_k + pi.deriv()[0]
            try:
                weight, phi = _factor_forms(problem.sigma, pi, tau)
            except RepeatedRootError:
                weight = phi = None
            branches.append(NUBranch(nu_k=nu_k, pi=pi, tau=tau, lam=lam, sign=sign, degenerate=degenerate, weight=weight, phi=phi))
    return branches


def radicand_is_square(problem: NUProblem, branch: NUBranch, tol: float = 1e-10) -> bool:
    """Zero-discriminant check of the radicand at the branch's k."""
    R = problem.radicand(branch.nu_k)
    disc = R[1] ** 2 - 4 * R[2] * R[0]
    return abs(disc) <= tol * _scale_of(R) ** 2


def _factor_forms(sigma: Poly, pi: Poly, tau: Poly) -> tuple[PowerForm, PowerForm]:
    """Weight rho with (sigma rho)' = tau rho, and phi with phi'/phi = pi/sigma."""
    if sigma.degree == 0:
        s0 = sigma[0]
        rho = PowerForm((), (), Poly([0, tau[0] / s0, tau[1] / (2 * s0)]))
        phi = PowerForm((), (), Poly([0, pi[0] / s0, pi[1] / (2 * s0)]))
        return rho, phi
    if sigma.degree == 1:
        s1 = sigma[1]
        (r1,) = sigma.roots()
        # sigma rho = s1 (z-r1)^(a+1) e^(c z): tau = s1 [(a+1) + c (z - r1)]
        c_rho = tau[1] / s1
        a_rho = tau(r1) / s1 - 1
        c_phi = pi[1] / s1
        a_phi = pi(r1) / s1
        return (
            PowerForm((r1,), (a_rho,), Poly([0, c_rho])),
            PowerForm((r1,), (a_phi,), Poly([0, c_phi])),
        )
    s2 = sigma[2]
    r1, r2 = sorted(sigma.roots(), key=lambda r: (r.real, r.imag))
    if abs(r1 - r2) <= 1e-12 * max(1.0, abs(r1)):
        raise RepeatedRootError("sigma has a double root")
    d = r1 - r2
    a_rho = tau(r1) / (s2 * d) - 1
    b_rho = -tau(r2) / (s2 * d) - 1
    a_phi = pi(r1) / (s2 * d)
    b_phi = -pi(r2) / (s2 * d)
    return PowerForm((r1, r2), (a_rho, b_rho)), PowerForm((r1, r2), (a_phi, b_phi))


def weight_and_phi(problem: NUProblem, branch: NUBranch) -> tuple[PowerForm, PowerForm]:
    return _factor_forms(problem.sigma, branch.pi, branch.tau)


def select_branch(branches: Sequence[NUBranch], domain: str = "standard") -> NUBranch:
    """Pick the physical branch.

    ``domain="standard"``: Re(tau') < 0, then phi regular at the lower root of
    sigma (Re exponent > 0), then smallest |k|.

    ``domain="negative_axis"``: for the z(1-z) family solved on z in (-inf, 0),
    where tau' < 0 is not the right test.  phi must be regular at z = 0 and, of
    those branches, the one with the largest Re(pi') decays fastest as
    z -> -inf; ties fall back to smallest |k|.
    """
    if not branches:
        raise NoAdmissibleBranch("no branches")

    def phi_regular_at_zero(b: NUBranch) -> bool:
        if b.phi is None or not b.phi.roots:
            return True
        root = min(b.phi.roots, key=lambda r: abs(r))
        # an exponent that is zero up to round-off is not regular
        tol = 1e-12 * _scale_of(b.pi)
        return b.phi.exponent_at(root).real > tol

    if domain == "standard":
        pool = [b for b in branches if b.tau_prime.real < 0]
        if not pool:
            raise NoAdmissibleBranch("every branch has Re(tau') >= 0")
        regular = [b for b in pool if phi_regular_at_zero(b)]
        pool = regular or pool
        return min(pool, key=lambda b: (abs(b.nu_k), b.nu_k.imag, b.nu_k.real))
    if domain == "negative_axis":
        pool = [b for b in branches if phi_regular_at_zero(b)]
        if not pool:
            raise NoAdmissibleBranch("no branch with phi regular at z = 0")
        return max(pool, key=lambda b: (round(b.pi[1].real, 12), -abs(b.nu_k)))
    raise ValueError(f"unknown domain {domain!r}")


def lambda_n(problem: NUProblem, branch: NUBranch, n: int) -> complex:
    """-n tau' - n(n-1) sigma''/2."""
    if n < 0:
        raise ValueError("n must be >= 0")
    sigma_pp = 2 * problem.sigma[2]
    return -n * branch.tau_prime - n * (n - 1) * sigma_pp / 2


def quantization_residual(problem: NUProblem, branch: NUBranch, n: int) -> complex:
    return branch.lam - lambda_n(problem, branch, n)


def rodrigues_polynomial(problem: NUProblem, branch: NUBranch, n: int, z):
    """y_n(z) = rho^-1 d^n/dz^n [sigma^n rho] for sigma with two distinct roots.

    Expanded with the Leibniz rule on (z-r1)^(a+n) (z-r2)^(b+n), so no numerical
    differentiation is involved.
    """
    weight = branch.weight if branch.weight is not None else weight_and_phi(problem, branch)[0]
    if len(weight.roots) != 2:
        raise NUError("Rodrigues expansion implemented for two-root sigma only")
    (r1, r2), (a, b) = weight.roots, weight.exponents
    s2 = problem.sigma[2]

    def falling(x, k):
        out = 1 + 0j
        for j in range(k):
            out *= x - j
        return out

    total = 0j * z
    for k in range(n + 1):
        total = total + math.comb(n, k) * falling(a + n, k) * falling(b + n, n - k) * (z - r1) ** (n - k) * (z - r2) ** k
    return s2**n * total


# --- the trigonometric Scarf family -------------------------------------------


def scarf_problem(gamma: float, eta: float, epsilon_sq: complex) -> NUProblem:
    """sigma = 2z(1-z), tau_t = 1-3z, sigma_t = -gamma z^2 + (gamma + eps^2 + eta) z - eta.

    This is the triple whose NU branches reproduce the published k values,
    radicand, spectral condition and energies.  The triple as printed carries
    the opposite sign on eta; see :func:`scarf_problem_as_printed`.
    """
    return NUProblem(
        sigma=Poly([0, 2, -2]),
        sigma_tilde=Poly([-eta, gamma + epsilon_sq + eta, -gamma]),
        tau_tilde=Poly([1, -3]),
    )


def scarf_problem_as_printed(gamma: float, eta: float, epsilon_sq: complex) -> NUProblem:
    """The literal triple with +eta in the constant term (attractive 1/sin^2)."""
    return NUProblem(
        sigma=Poly([0, 2, -2]),
        sigma_tilde=Poly([eta, gamma + epsilon_sq - eta, -gamma]),
        tau_tilde=Poly([1, -3]),
    )


def scarf_residual(gamma: float, eta: float, n_r: int, nu: float) -> tuple[complex, NUBranch]:
    """Quantization residual of the Scarf triple at epsilon = i nu."""
    problem = scarf_problem(gamma, eta, -(nu**2))
    branch = select_branch(enumerate_branches(problem), domain="negative_axis")
    return quantization_residual(problem, branch, n_r), branch


def solve_scarf_nu(gamma: float, eta: float, n_r: int, scan_points: int = 120) -> float:
    """Decay exponent nu = -i epsilon of the n_r-th state, found from the NU engine alone.

    A geometric scan in nu brackets sign changes of the quantization residual.
    Two roots closer than the grid spacing show up as a local extremum instead
    of a sign change, so every interior extremum is refined and used to split
    its interval.  Of the roots, the admissible one gives pi' > 2 n_r, i.e. F
    vanishes at the far end of the radial interval.
    """

    def f(x):
        return scarf_residual(gamma, eta, n_r, x)[0].real

    upper = 10.0 + 4.0 * (n_r + 1) + 4.0 * math.sqrt(1 + abs(gamma)) + 4.0 * math.sqrt(1 + abs(eta))
    grid = list(np.geomspace(1e-6, upper, scan_points))
    values = [f(x) for x in grid]
    points = list(zip(grid, values))
    for i in range(1, len(grid) - 1):
        d0, d1 = values[i] - values[i - 1], values[i + 1] - values[i]
        if d0 * d1 < 0:
            sign = 1.0 if d0 > 0 else -1.0
            res = minimize_scalar(lambda x: -sign * f(x), bounds=(grid[i - 1], grid[i + 1]), method="bounded", options={"xatol": 1e-12 * grid[i]})
            points.append((res.x, f(res.x)))
    points.sort()
    roots = []
    for (lo, flo), (hi, fhi) in zip(points[:-1], points[1:]):
        if flo == 0:
            roots.append(lo)
        elif flo * fhi < 0:
            roots.append(brentq(f, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500))
    admissible = [x for x in roots if scarf_residual(gamma, eta, n_r, x)[1].pi[1].real > 2 * n_r]
    if not admissible:
        raise NoAdmissibleBranch(f"no admissible root for gamma={gamma}, eta={eta}, n_r={n_r}")
    return max(admissible)


def solve_spectral_parameter(
    family: Callable[[float], NUProblem],
    n: int,
    bracket: tuple[float, float],
    domain: str = "standard",
) -> float:
    """Real spectral parameter x with quantization_residual(family(x)) = 0 inside ``bracket``."""

    def f(x):
        problem = family(x)
        branch = select_branch(enumerate_branches(problem), domain=domain)
        return quantization_residual(problem, branch, n).real

    return brentq(f, *bracket, xtol=1e-300, rtol=1e-15, maxiter=500)
