"""Finite-difference oracle for the effective radial equation.

The operator

    H = -d^2/dr^2 + alpha^2 [gamma c(r) + eta / sin^2(alpha r)]

is discretized with the 3-point Laplacian on a uniform grid over
(delta, L - delta), L = pi/(2 alpha), with Dirichlet ends.  Its eigenvalues come
from Sturm-sequence bisection, so only the wanted one is computed.  Because eta
depends on E, the bound-state energy is the root of

    g(E) = mu_{n_r}(E) + eps^2(E) alpha^2,

found with an outer Brent iteration.  Nothing here uses the NU solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .core import ModelParams, ParameterError, QuantumNumbers, ScarfError


class OracleError(ScarfError):
    pass


class IndexOutOfRange(OracleError, IndexError):
    pass


class NoBracket(OracleError):
    pass


class CentrifugalMode(str, Enum):
    PAPER_COS = "PaperCos"
    SIN_SQUARED = "SinSquared"
    EXACT = "Exact"


@dataclass(frozen=True)
class OperatorConfig:
    centrifugal_mode: CentrifugalMode = CentrifugalMode.PAPER_COS
    grid_points: int = 20_000
    boundary_offset: float = 1e-6
    richardson: bool = True

    def __post_init__(self):
        object.__setattr__(self, "centrifugal_mode", CentrifugalMode(self.centrifugal_mode))
        if self.grid_points < 100:
            raise ParameterError(f"grid_points must be >= 100, got {self.grid_points}")
        if not 0 < self.boundary_offset < 0.5:
            raise ParameterError(f"boundary_offset must lie in (0, 0.5), got {self.boundary_offset}")


@dataclass(frozen=True)
class EffectiveOperator:
    r: np.ndarray
    h: float
    diagonal: np.ndarray
    off_diagonal: np.ndarray  # all equal to -1/h^2

    @property
    def size(self) -> int:
        return self.diagonal.size


def assemble_from_strengths(alpha: float, gamma: float, eta: float, config: OperatorConfig) -> EffectiveOperator:
    L = math.pi / (2 * alpha)
    delta = config.boundary_offset * L
    r = np.linspace(delta, L - delta, config.grid_points + 2)[1:-1]
    h = float(r[1] - r[0])
    ar = alpha * r
    if config.centrifugal_mode is CentrifugalMode.PAPER_COS:
        c = 1 / np.cos(ar) ** 2
    elif config.centrifugal_mode is CentrifugalMode.SIN_SQUARED:
        c = 1 / np.sin(ar) ** 2
    else:
        c = 1 / ar**2
    V = alpha**2 * (gamma * c + eta / np.sin(ar) ** 2)
    return EffectiveOperator(r, h, 2 / h**2 + V, np.full(r.size - 1, -1 / h**2))


def strengths(params: ModelParams, qn: QuantumNumbers, E: float) -> tuple[float, float]:
    """(gamma, eta) with gamma from k = l + (D-1)/2."""
    k = qn.label_k
    gamma = k * (k + 1) if params.is_spin else k * (k - 1)
    eta = params.depth * params.coupling(E) / params.alpha**2
    return gamma, eta


def assemble(params: ModelParams, qn: QuantumNumbers, E: float, config: OperatorConfig = OperatorConfig()) -> EffectiveOperator:
    gamma, eta = strengths(params, qn, E)
    return assemble_from_strengths(params.alpha, gamma, eta, config)


@njit(cache=True, nogil=True)
def _sturm_count(d, e2, mu):
    count = 0
    q = d[0] - mu
    if q < 0:
        count += 1
    for i in range(1, d.size):
        if q == 0.0:
            q = 1e-300
        q = d[i] - mu - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


@njit(cache=True, nogil=True)
def _bisect_eigenvalue(d, e2, k, lo, hi):
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(d, e2, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sturm_count(op: EffectiveOperator, mu: float) -> int:
    """Number of eigenvalues below mu."""
    return int(_sturm_count(op.diagonal, op.off_diagonal**2, float(mu)))


def eigenvalue(op: EffectiveOperator, n_r: int) -> float:
    """(n_r+1)-th smallest eigenvalue by Sturm bisection inside the Gershgorin interval."""
    if not 0 <= n_r < op.size:
        raise IndexOutOfRange(f"index {n_r} outside 0..{op.size - 1}")
    radius = 2 * abs(op.off_diagonal[0]) if op.size > 1 else 0.0
    lo = float(op.diagonal.min() - radius)
    hi = float(op.diagonal.max() + radius)
    return float(_bisect_eigenvalue(op.diagonal, op.off_diagonal**2, n_r, lo, hi))


@dataclass(frozen=True)
class OracleResult:
    E: float
    g_residual: float
    error_estimate: float
    iterations: int
    grid_points: tuple[int, ...]
    energies: tuple[float, ...]


def _eps_alpha_sq(params: ModelParams, E: float) -> float:
    return params.partner(E) * params.coupling(E)


def g_function(params: ModelParams, qn: QuantumNumbers, E: float, config: OperatorConfig) -> float:
    n_r = _radial_index(qn)
    return eigenvalue(assemble(params, qn, E, config), n_r) + _eps_alpha_sq(params, E)


def _radial_index(qn: QuantumNumbers) -> int:
    if qn.n_r is None:
        raise ParameterError(f"n={qn.n}, l={qn.l} has no integer n_r")
    return qn.n_r


def default_window(params: ModelParams) -> tuple[float, float]:
    """Energies with M+E-Cs > 0 (spin) or M-E+Cps > 0 (pseudospin), capped at 20M."""
    span = 20 * max(abs(params.M), 1.0)
    tiny = 1e-9 * max(1.0, abs(params.M))
    if params.is_spin:
        return params.C - params.M + tiny, params.C - params.M + span
    return params.M + params.C - span, params.M + params.C - tiny


def find_bracket(params: ModelParams, qn: QuantumNumbers, config: OperatorConfig, window=None, points: int = 41) -> tuple[float, float]:
    """First sign change of g on a coarse grid (a cheap 1000-point operator)."""
    lo, hi = default_window(params) if window is None else window
    coarse = OperatorConfig(config.centrifugal_mode, 1000, config.boundary_offset, False)
    grid = np.linspace(lo, hi, points)
    values = [g_function(params, qn, E, coarse) for E in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa * fb <= 0:
            # widen by one cell on each side: the fine grid shifts the root slightly
            step = grid[1] - grid[0]
            return max(lo, a - step), min(hi, b + step)
    raise NoBracket(f"g has no sign change on [{lo:g}, {hi:g}]")


def _solve_on_grid(params, qn, config, bracket) -> tuple[float, int]:
    f = lambda E: g_function(params, qn, E, config)
    fa, fb = f(bracket[0]), f(bracket[1])
    if fa * fb > 0:
        raise NoBracket(f"g({bracket[0]:g})={fa:g} and g({bracket[1]:g})={fb:g} have the same sign")
    E, info = brentq(f, *bracket, xtol=1e-15, rtol=1e-15, maxiter=200, full_output=True)
    return E, info.function_calls


def _coarse_points(n_fine: int) -> int:
    # halve the spacing exactly when n_fine + 1 is even
    return max(100, (n_fine + 1) // 2 - 1)


def _spacing(alpha: float, n: int, offset: float) -> float:
    L = math.pi / (2 * alpha)
    return (L - 2 * offset * L) / (n + 1)


def richardson(E_fine: float, E_coarse: float, ratio: float, order: float = 2.0) -> float:
    """(r^p E_f - E_c)/(r^p - 1) with r = h_coarse/h_fine."""
    rp = ratio**order
    return (rp * E_fine - E_coarse) / (rp - 1)


def self_consistent_energy(
    params: ModelParams,
    qn: QuantumNumbers,
    config: OperatorConfig = OperatorConfig(),
    bracket: tuple[float, float] | None = None,
) -> OracleResult:
    if bracket is None:
        bracket = find_bracket(params, qn, config)
    E_f, calls = _solve_on_grid(params, qn, config, bracket)
    g_res = g_function(params, qn, E_f, config)
    if not config.richardson:
        return OracleResult(E_f, g_res, math.nan, calls, (config.grid_points,), (E_f,))
    n_c = _coarse_points(config.grid_points)
    coarse = OperatorConfig(config.centrifugal_mode, n_c, config.boundary_offset, False)
    E_c, calls_c = _solve_on_grid(params, qn, coarse, bracket)
    ratio = _spacing(params.alpha, n_c, config.boundary_offset) / _spacing(params.alpha, config.grid_points, config.boundary_offset)
    E_r = richardson(E_f, E_c, ratio)
    return OracleResult(E_r, g_res, abs(E_f - E_r), calls + calls_c, (n_c, config.grid_points), (E_c, E_f))


@dataclass(frozen=True)
class ConvergenceStudy:
    grid_points: tuple[int, ...]
    energies: tuple[float, ...]
    estimated_errors: tuple[float, ...]
    order: float
    extrapolated: float


def convergence_study(
    params: ModelParams,
    qn: QuantumNumbers,
    config: OperatorConfig = OperatorConfig(grid_points=2_000),
    levels: int = 3,
    bracket: tuple[float, float] | None = None,
) -> ConvergenceStudy:
    """Energies on grids with spacing h, h/2, h/4, ... and the observed order.

    The grid sizes are (N+1) 2^k - 1, so consecutive spacings halve exactly.
    """
    if levels < 3:
        raise ParameterError("a convergence study needs at least 3 grids")
    if bracket is None:
        bracket = find_bracket(params, qn, config)
    sizes = tuple((config.grid_points + 1) * 2**k - 1 for k in range(levels))
    energies = []
    for n in sizes:
        cfg = OperatorConfig(config.centrifugal_mode, n, config.boundary_offset, False)
        energies.append(_solve_on_grid(params, qn, cfg, bracket)[0])
    d1, d2 = energies[-3] - energies[-2], energies[-2] - energies[-1]
    order = math.log2(abs(d1 / d2)) if d1 != 0 and d2 != 0 else math.nan
    extrapolated = richardson(energies[-1], energies[-2], 2.0)
    errors = tuple(abs(E - extrapolated) for E in energies)
    return ConvergenceStudy(sizes, tuple(energies), errors, order, extrapolated)
