"""Spinor components on the radial interval (0, pi/(2 alpha)).

With z = -tan^2(alpha r) and the decay exponent nu = -i eps > 0, the component
that obeys the Scarf equation is

    F(r) = N z^((1+Lambda)/4) (1-z)^(-nu/2) P_{n_r}^(Lambda/2, -nu)(1-2z),

F for spin symmetry and G for pseudospin symmetry; the partner follows from
the first-order Dirac relation.  z < 0, so z^((1+Lambda)/4) carries the
constant principal-branch phase exp(i pi (1+Lambda)/4).  Magnitudes span
thousands of decades for small alpha, so everything is evaluated in log space
and the normalization is stored as ``log_norm``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import ModelParams, ParameterError, QuantumNumbers, ScarfError, derived_coefficients
from .specfun import DivergentSeries, PoleError, gauss_2f1_at_1, jacobi, jacobi_derivative, log_gamma
from .spectra import EnergyEquationSpec, NoRootInInterval, Variant, solve_real


class DomainError(ScarfError, ValueError):
    pass


class SymmetryConstantPole(ScarfError, ZeroDivisionError):
    pass


class QuadratureFailure(ScarfError, ArithmeticError):
    pass


class NotBound(ScarfError, ValueError):
    pass


def domain_length(alpha: float) -> float:
    return math.pi / (2 * alpha)


def z_of_r(r, alpha: float):
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)) or np.any(~(r_arr < domain_length(alpha))):
        raise DomainError(f"r must lie in (0, {domain_length(alpha):g})")
    t = np.tan(alpha * r_arr)
    out = -t * t
    return float(out) if np.ndim(r) == 0 else out


def r_of_z(z, alpha: float):
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr < 0)) or np.any(~np.isfinite(z_arr)):
        raise DomainError("z must be finite and negative")
    out = np.arctan(np.sqrt(-z_arr)) / alpha
    return float(out) if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class SpinorState:
    """A bound state with its closed-form parameters.

    ``lambda_cap`` and ``nu`` belong to the Scarf-type component (F for spin,
    G for pseudospin).  ``log_norm`` is log N; ``norm`` may overflow.
    """

    params: ModelParams
    qn: QuantumNumbers
    E: float
    nu: float
    lambda_cap: float
    log_norm: float = 0.0

    def __post_init__(self):
        if self.qn.n_r is None:
            raise ParameterError(f"n={self.qn.n}, l={self.qn.l} does not map to an integer n_r")
        if not self.nu > 0:
            raise NotBound(f"nu must be positive, got {self.nu}")

    @property
    def n_r(self) -> int:
        return self.qn.n_r

    @property
    def norm(self) -> float:
        return math.exp(self.log_norm)

    @property
    def length(self) -> float:
        return domain_length(self.params.alpha)

    @property
    def phase(self) -> complex:
        return cmath.exp(1j * math.pi * (1 + self.lambda_cap) / 4)

    @property
    def jacobi_params(self) -> tuple[float, float]:
        return self.lambda_cap / 2, -self.nu

    @property
    def small_r_exponent(self) -> float:
        return (1 + self.lambda_cap) / 2


@dataclass(frozen=True)
class SpinorSample:
    r: float
    z: float
    F: complex
    G: complex


def state_from_energy(params: ModelParams, qn: QuantumNumbers, E: float) -> SpinorState:
    d = derived_coefficients(params, qn, E)
    if not d.bound or isinstance(d.lambda_cap, complex):
        raise NotBound(f"E={E} is not a bound state (eps^2={d.epsilon_sq:g}, 1+4eta={1 + 4 * d.eta:g})")
    return SpinorState(params, qn, float(E), d.nu, float(d.lambda_cap))


def make_state(params: ModelParams, qn: QuantumNumbers, E: float | None = None, normalized: bool = True) -> SpinorState:
    """State for ``qn`` (which must carry n_r); E defaults to the normalizable trig root."""
    if E is None:
        variant = Variant.SPIN_TRIG if params.is_spin else Variant.PSEUDOSPIN_TRIG
        roots = [r for r in solve_real(EnergyEquationSpec(params, qn, variant)) if r.normalizable]
        if not roots:
            raise NoRootInInterval(f"no normalizable root for {qn}")
        E = roots[0].E.real
    state = state_from_energy(params, qn, E)
    return normalize(state) if normalized else state


# --- closed form and its derivative ------------------------------------------


def _log_envelope(state: SpinorState, r):
    """log of |z|^((1+Lambda)/4) (1-z)^(-nu/2), a = (1+Lambda)/2.

    Written as a log sin + (nu - a) log cos: a and nu are both large and nearly
    equal for small alpha, and a log tan + nu log cos would cancel badly.
    """
    ar = state.params.alpha * np.asarray(r, dtype=float)
    a = state.small_r_exponent
    return a * np.log(np.sin(ar)) + (state.nu - a) * np.log(np.cos(ar))


def _jacobi_factor(state: SpinorState, t):
    a, b = state.jacobi_params
    return np.real(jacobi(state.n_r, a, b, 1 + 2 * t * t))


def closed_form_component(state: SpinorState, r):
    """The Scarf-type component: F (spin) or G (pseudospin)."""
    z_of_r(r, state.params.alpha)  # domain check
    t = np.tan(state.params.alpha * np.asarray(r, dtype=float))
    env = np.exp(_log_envelope(state, r) + state.log_norm)
    return state.phase * env * _jacobi_factor(state, t)


def closed_form_derivative(state: SpinorState, r):
    """d/dr of :func:`closed_form_component`, from the Jacobi derivative identity.

    With t = tan(alpha r) and x = 1 + 2 t^2 = 1 - 2z:
    dt/dr = alpha (1 + t^2), dx/dr = 4 alpha t (1 + t^2).
    """
    z_of_r(r, state.params.alpha)
    alpha = state.params.alpha
    t = np.tan(alpha * np.asarray(r, dtype=float))
    a, b = state.jacobi_params
    x = 1 + 2 * t * t
    P = np.real(jacobi(state.n_r, a, b, x))
    dP = np.real(jacobi_derivative(state.n_r, a, b, x))
    env = np.exp(_log_envelope(state, r) + state.log_norm)
    sec2 = 1 + t * t
    a_exp = state.small_r_exponent
    d_log_env = alpha * (a_exp / t + (a_exp - state.nu) * t)
    return state.phase * env * (d_log_env * P + 4 * alpha * t * sec2 * dP)


def _relation_denominator(state: SpinorState) -> float:
    X = state.params.coupling(state.E)
    if X == 0:
        raise SymmetryConstantPole("M+E-Cs = 0" if state.params.is_spin else "M-E+Cps = 0")
    return X


def partner_via_relation(state: SpinorState, r):
    """The other component from the Dirac relation.

    spin:       G = (dF/dr + kappa F / r) / (M + E - Cs)
    pseudospin: F = (dG/dr - kappa G / r) / (M - E + Cps)
    """
    X = _relation_denominator(state)
    kappa = state.qn.kappa
    r_arr = np.asarray(r, dtype=float)
    f = closed_form_component(state, r_arr)
    df = closed_form_derivative(state, r_arr)
    sign = 1 if state.params.is_spin else -1
    return (df + sign * kappa * f / r_arr) / X


def upper_component(state: SpinorState, r):
    return closed_form_component(state, r) if state.params.is_spin else partner_via_relation(state, r)


def lower_component(state: SpinorState, r):
    return partner_via_relation(state, r) if state.params.is_spin else closed_form_component(state, r)


def lower_component_via_relation(state: SpinorState, r):
    """Relation-derived partner: G for spin; for pseudospin the relation yields F."""
    return partner_via_relation(state, r)


def lower_component_paper_form(state: SpinorState, r, include_kappa_term: bool = True):
    """Literal two-term closed form for the lower component (audit only).

    Evaluated with i eps = -nu (so eps = i nu), principal branches for powers of
    z < 0, and the printed k/(i tanh alpha) term, which does not depend on r.
    ``include_kappa_term=False`` drops that term.
    """
    _relation_denominator(state)
    alpha = state.params.alpha
    r_arr = np.asarray(r, dtype=float)
    z = z_of_r(r_arr, alpha) + 0j
    log_z = np.log(np.abs(z)) + 1j * math.pi
    log_1mz = np.log(1 - z.real)
    i_eps = -state.nu
    eps = 1j * state.nu
    lam = state.lambda_cap
    n = state.n_r
    k = state.qn.label_k
    x = 1 - 2 * z.real
    sqrt_z = np.exp(0.5 * log_z)

    kterm = k / (1j * math.tanh(alpha)) if include_kappa_term else 0.0
    first = np.exp(state.log_norm + (i_eps / 2) * log_1mz + (1 + lam) / 4 * log_z) * jacobi(n, i_eps, lam / 2, x)
    first = first * (-alpha * (1j * (lam + 1) / 2 * (1 - z) / sqrt_z + eps * sqrt_z - kterm))
    second = np.exp(state.log_norm + (i_eps + 2) / 2 * log_1mz + (3 + lam) / 4 * log_z) * jacobi(n - 1, i_eps + 1, lam / 2 + 1, x)
    second = second * (-alpha * (1j * (lam + 2 * n) / 2 + eps))
    return first + second


def printed_form_deviation(state: SpinorState, points: int = 1000, include_kappa_term: bool = True) -> float:
    """max |G_printed - G_relation| / max |G_relation| on an interior grid."""
    L = state.length
    r = np.linspace(L * 1e-3, L * (1 - 1e-3), points)
    g_rel = lower_component_via_relation(state, r)
    g_printed = lower_component_paper_form(state, r, include_kappa_term)
    scale = np.max(np.abs(g_rel))
    return float(np.max(np.abs(g_printed - g_rel)) / scale)


# --- normalization -------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    order: int = 20
    atol: float = 1e-10
    max_panels: int = 20_000
    initial_panels: int = 64
    probe_points: int = 4001


def log_abs_component(state: SpinorState, r):
    """log |closed form| including log_norm; finite where exp() would underflow."""
    z_of_r(r, state.params.alpha)
    r = np.asarray(r, dtype=float)
    t = np.tan(state.params.alpha * r)
    P = _jacobi_factor(state, t)
    with np.errstate(divide="ignore"):
        return _log_envelope(state, r) + np.log(np.abs(P)) + state.log_norm


def _initial_breaks(L: float, peak: float, panels: int) -> np.ndarray:
    # geometric grading towards both ends, uniform panels in between
    grade = L * np.geomspace(1e-12, 1e-2, 12)
    pts = np.concatenate([[0.0, L, peak], grade, L - grade, np.linspace(0, L, panels + 1)])
    return np.unique(np.clip(pts, 0.0, L))


def _adaptive_gauss_legendre(f, breaks: np.ndarray, tol: float, cfg: QuadratureConfig) -> tuple[float, float, int]:
    nodes, weights = leggauss(cfg.order)

    def gl(a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * np.dot(weights, f(mid + half * nodes))

    total_len = breaks[-1] - breaks[0]
    stack = [(a, b, gl(a, b)) for a, b in zip(breaks[:-1], breaks[1:]) if b > a]
    total = err = 0.0
    panels = len(stack)
    while stack:
        a, b, whole = stack.pop()
        m = 0.5 * (a + b)
        left, right = gl(a, m), gl(m, b)
        diff = abs(left + right - whole)
        # the floor keeps round-off in the integrand from forcing endless splits
        if diff <= max(tol * (b - a) / total_len, 64 * np.finfo(float).eps * abs(left + right)) or b - a < 1e-14 * total_len:
            total += left + right
            err += diff
            continue
        panels += 1
        if panels > cfg.max_panels:
            raise QuadratureFailure(f"panel budget {cfg.max_panels} exhausted")
        stack.append((a, m, left))
        stack.append((m, b, right))
    return total, err, panels


def _scaled_density(state: SpinorState, cfg: QuadratureConfig):
    """|closed form|^2 / exp(2 m) with m the probed maximum of the log magnitude."""
    L = state.length
    probe = np.linspace(L, 0, cfg.probe_points + 2)[1:-1]
    logs = log_abs_component(state, probe) - state.log_norm
    i = int(np.nanargmax(logs))
    m, peak = float(logs[i]), float(probe[i])

    def f(r):
        inside = (r > 0) & (r < L)
        out = np.zeros_like(r)
        ri = r[inside]
        t = np.tan(state.params.alpha * ri)
        P = _jacobi_factor(state, t)
        out[inside] = np.exp(2 * (_log_envelope(state, ri) - m)) * P * P
        return out

    return f, m, peak


def norm_integral(state: SpinorState, cfg: QuadratureConfig = QuadratureConfig()) -> tuple[float, float]:
    """(integral of |closed form|^2 over the domain, error estimate) in absolute units."""
    f, m, peak = _scaled_density(state, cfg)
    breaks = _initial_breaks(state.length, peak, cfg.initial_panels)
    rough, _, _ = _adaptive_gauss_legendre(f, breaks, 1e-6 * state.length, cfg)
    value, err, _ = _adaptive_gauss_legendre(f, breaks, cfg.atol * rough, cfg)
    if err > cfg.atol * value:
        raise QuadratureFailure(f"error estimate {err / value:.2e} above tolerance")
    scale = math.exp(2 * (m + state.log_norm))
    return value * scale, err * scale


def normalize(state: SpinorState, cfg: QuadratureConfig = QuadratureConfig()) -> SpinorState:
    """Return the state with log_norm chosen so that the closed-form component has unit norm.

    Any previous normalization is discarded.
    """
    base = replace(state, log_norm=0.0)
    f, m, peak = _scaled_density(base, cfg)
    breaks = _initial_breaks(base.length, peak, cfg.initial_panels)
    rough, _, _ = _adaptive_gauss_legendre(f, breaks, 1e-6 * base.length, cfg)
    value, err, _ = _adaptive_gauss_legendre(f, breaks, cfg.atol * rough, cfg)
    if not value > 0 or err > cfg.atol * value:
        raise QuadratureFailure(f"integral {value!r} with error {err!r}")
    return replace(base, log_norm=-m - 0.5 * math.log(value))


def count_nodes(state: SpinorState, points: int = 50_001) -> int:
    """Interior zeros of the closed-form component, from sign changes of its Jacobi factor."""
    s = np.geomspace(1e-12, 1e16, points)  # s = 2 t^2 = x - 1
    a, b = state.jacobi_params
    P = np.real(jacobi(state.n_r, a, b, 1 + s))
    signs = np.sign(P)
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def sample(state: SpinorState, r) -> list[SpinorSample]:
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    z = z_of_r(r_arr, state.params.alpha)
    F = np.atleast_1d(upper_component(state, r_arr))
    G = np.atleast_1d(lower_component(state, r_arr))
    return [SpinorSample(float(ri), float(zi), complex(fi), complex(gi)) for ri, zi, fi, gi in zip(r_arr, z, F, G)]


# --- literal normalization-constant audit ---------------------------------------


@dataclass
class NormalizationAudit:
    n_r: int
    c: float
    d: float
    numeric_norm_log: float
    terms: list[dict] = field(default_factory=list)


def _log_a_nq(n: int, c: complex, d: complex, p: int, r: int, q: float) -> complex:
    """log of the printed A_nq(p, r); the sum index shadows p, as printed."""
    pref = 2 * log_gamma(n + c + 1) + log_gamma(n + d + 1) - log_gamma(n + c - p + 1) - log_gamma(n + d + 1) - log_gamma(c + d + 1)
    total = 0j
    for pp in range(n + 1):
        num = (-1) ** (pp + r) * q ** (n - pp + r) * cmath.exp(log_gamma(n + c + d + r + 1) - log_gamma(pp + d + 1))
        total += num / (math.factorial(pp) * math.factorial(r) * math.factorial(n - pp) * math.factorial(n - r))
    return pref + cmath.log((-1) ** n * total)


def _b_nq(n: int, c: complex, lam: float, alpha: float, p: int, r: int) -> complex:
    """The printed B_nq(p, r), reading its third 2F1 argument as (4+Lambda)/2 + n - p + r."""
    a_ = (2 + lam) / 2 + n - p + r
    b_ = 1 - c - p
    c_ = (4 + lam) / 2 + n - p + r
    f = gauss_2f1_at_1(a_, b_, c_)
    return 1 / (f / (-1j * alpha * (lam + (2 * n - p + r + 1))))


def paper_normalization_audit(state: SpinorState, q: float | None = None) -> NormalizationAudit:
    """Evaluate the printed N = sqrt(B/A) on every (p, r) in 0..n_r and record the outcome.

    Each term records either the ratio sqrt(B/A) (absolute value) or the error
    raised (Gamma pole, divergent Gauss series).  Never used for production
    normalization.
    """
    if state.log_norm == 0.0:
        state = normalize(state)
    n = state.n_r
    c, d = -state.nu, state.lambda_cap / 2
    q = state.params.q if q is None else q
    report = NormalizationAudit(n_r=n, c=c, d=d, numeric_norm_log=state.log_norm)
    for p in range(n + 1):
        for r in range(n + 1):
            term = {"p": p, "r": r}
            try:
                log_a = _log_a_nq(n, c, d, p, r, q)
                term["log_A"] = log_a
            except (PoleError, ValueError, ZeroDivisionError) as exc:
                term["error_A"] = f"{type(exc).__name__}: {exc}"
            try:
                term["B"] = _b_nq(n, c, state.lambda_cap, state.params.alpha, p, r)
            except (PoleError, DivergentSeries, ZeroDivisionError) as exc:
                term["error_B"] = f"{type(exc).__name__}: {exc}"
            if "log_A" in term and "B" in term:
                log_ratio = 0.5 * (cmath.log(term["B"]) - term["log_A"])
                term["log_abs_ratio"] = log_ratio.real
                term["log_ratio_minus_numeric"] = log_ratio.real - state.log_norm
            report.terms.append(term)
    return report
