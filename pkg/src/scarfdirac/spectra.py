"""Energy equations as residual functions, their solvers and a table auditor.

Every variant shares one shape

    residual(E) = LHS(E) + s * (alpha^2/4) * (base + c * sqrt(R(E)))^2,
    R(E) = r0 + 4 * depth * X(E),

with LHS = (M-E)(M+E-Cs), X = M+E-Cs, base = 2n+D for spin and
LHS = (M+E)(M-E+Cps), X = M-E+Cps, base = 2n+D-2 for pseudospin.  The
trigonometric equations have s = +1, c = 1/alpha, r0 = alpha^2; the
hyperbolic (PT, q-deformed, non-PT) ones have s = -1, c = -i/alpha,
r0 = -alpha^2.  The square root is the principal branch throughout.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import bisect

from .core import ModelParams, ParameterError, QuantumNumbers, ScarfError, Symmetry, derived_coefficients


class SpectraError(ScarfError):
    pass


class ComplexRadicandOnRealPath(SpectraError):
    pass


class NoRootInInterval(SpectraError):
    pass


class NonConvergence(SpectraError):
    pass


class TableFormatError(SpectraError, ValueError):
    pass


class Variant(str, Enum):
    SPIN_TRIG = "SpinTrig"
    PSEUDOSPIN_TRIG = "PseudospinTrig"
    SPIN_PT = "SpinPT"
    PSEUDOSPIN_PT = "PseudospinPT"
    SPIN_Q_DEFORMED = "SpinQDeformed"
    PSEUDOSPIN_Q_DEFORMED = "PseudospinQDeformed"
    SPIN_NON_PT = "SpinNonPT"
    PSEUDOSPIN_NON_PT = "PseudospinNonPT"

    @property
    def is_spin(self) -> bool:
        return self.value.startswith("Spin")

    @property
    def is_real(self) -> bool:
        return self in (Variant.SPIN_TRIG, Variant.PSEUDOSPIN_TRIG)

    @property
    def needs_complex_depths(self) -> bool:
        return self in (Variant.SPIN_NON_PT, Variant.PSEUDOSPIN_NON_PT)


@dataclass(frozen=True)
class ComplexDepths:
    V1: float
    V2: float
    S1: float
    S2: float


@dataclass(frozen=True)
class EnergyEquationSpec:
    params: ModelParams
    qn: QuantumNumbers
    variant: Variant = Variant.SPIN_TRIG
    complex_depths: ComplexDepths | None = None

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        if variant.needs_complex_depths and self.complex_depths is None:
            raise ParameterError(f"{variant.value} needs complex_depths (V1, V2, S1, S2)")
        if not variant.needs_complex_depths and self.complex_depths is not None:
            raise ParameterError(f"{variant.value} does not take complex_depths")
        if self.complex_depths is not None and not isinstance(self.complex_depths, ComplexDepths):
            object.__setattr__(self, "complex_depths", ComplexDepths(*self.complex_depths))
        sym = Symmetry.SPIN if variant.is_spin else Symmetry.PSEUDOSPIN
        if self.params.symmetry is not sym:
            raise ParameterError(f"{variant.value} needs params.symmetry={sym.value}")


@dataclass(frozen=True)
class _Shape:
    sign: int
    c: complex
    r0: float
    depth: complex
    base: float
    spin: bool


def _shape(spec: EnergyEquationSpec) -> _Shape:
    p, v = spec.params, spec.variant
    a = p.alpha
    base = 2 * spec.qn.n + spec.qn.D - (0 if v.is_spin else 2)
    if v.is_real:
        depth = p.V0 + p.S0 if v.is_spin else p.V0 - p.S0
        return _Shape(1, 1 / a, a * a, depth, base, v.is_spin)
    if v in (Variant.SPIN_PT, Variant.PSEUDOSPIN_PT):
        depth = p.S0 + p.V0 if v.is_spin else p.S0 - p.V0
    elif v in (Variant.SPIN_Q_DEFORMED, Variant.PSEUDOSPIN_Q_DEFORMED):
        depth = (p.S0 + p.V0 if v.is_spin else p.S0 - p.V0) / p.q
    else:
        cd = spec.complex_depths
        if v.is_spin:
            depth = ((cd.V1 + cd.S1) * 1j + (cd.S2 + cd.V2)) / p.q
        else:
            depth = ((cd.V1 - cd.S1) * 1j + (cd.S2 - cd.V2)) / p.q
    return _Shape(-1, -1j / a, -a * a, depth, base, v.is_spin)


def _pieces(spec: EnergyEquationSpec, E):
    p = spec.params
    sh = _shape(spec)
    if sh.spin:
        X, lhs, dX, dlhs = p.M + E - p.C, (p.M - E) * (p.M + E - p.C), 1.0, (p.M - E) - (p.M + E - p.C)
    else:
        X, lhs, dX, dlhs = p.M - E + p.C, (p.M + E) * (p.M - E + p.C), -1.0, (p.M - E + p.C) - (p.M + E)
    R = sh.r0 + 4 * sh.depth * X
    return sh, X, lhs, dX, dlhs, R


def radicand(spec: EnergyEquationSpec, E):
    return _pieces(spec, E)[5]


def residual(spec: EnergyEquationSpec, E):
    """LHS - RHS of the selected energy equation at (complex or array) E."""
    sh, _, lhs, _, _, R = _pieces(spec, E)
    root = np.sqrt(R + 0j)  # +0j drops a -0.0 imaginary part at the branch cut
    bracket = sh.base + sh.c * root
    return lhs + sh.sign * spec.params.alpha**2 / 4 * bracket * bracket


def residual_derivative(spec: EnergyEquationSpec, E):
    """Analytic dR/dE of :func:`residual` (principal branch, R != 0)."""
    sh, _, _, dX, dlhs, R = _pieces(spec, E)
    root = np.sqrt(R + 0j)
    bracket = sh.base + sh.c * root
    d_root = 4 * sh.depth * dX / (2 * root)
    return dlhs + sh.sign * spec.params.alpha**2 / 2 * bracket * sh.c * d_root


def real_residual(spec: EnergyEquationSpec, E: float) -> float:
    """Residual on the real line; a negative radicand means no bound state there."""
    if not spec.variant.is_real:
        raise SpectraError(f"{spec.variant.value} is not a real-line equation")
    R = radicand(spec, E)
    if R < 0:
        raise ComplexRadicandOnRealPath(f"radicand {R:g} < 0 at E={E:g}")
    return float(np.real(residual(spec, E)))


@dataclass(frozen=True)
class EnergyRoot:
    E: complex
    residual: complex
    iterations: int
    radicand_ok: bool
    normalizable: bool
    bracket_converged: bool

    @property
    def valid(self) -> dict:
        return {
            "radicand_ok": self.radicand_ok,
            "normalizable": self.normalizable,
            "bracket_converged": self.bracket_converged,
        }


def _flags(spec: EnergyEquationSpec, E: complex) -> tuple[bool, bool]:
    R = complex(radicand(spec, E))
    radicand_ok = R.real >= 0 and abs(R.imag) <= 1e-14 * max(1.0, abs(R))
    if not spec.variant.is_real or abs(complex(E).imag) > 0:
        return radicand_ok, False
    d = derived_coefficients(spec.params, spec.qn, float(complex(E).real))
    X = spec.params.coupling(float(complex(E).real))
    return radicand_ok, bool(X > 0 and d.bound)


@dataclass(frozen=True)
class ScanConfig:
    lo: float | None = None
    hi: float | None = None
    points: int = 10_000

    def window(self, M: float) -> tuple[float, float]:
        scale = max(abs(M), 1.0) if M == 0 else abs(M)
        lo = -20 * scale if self.lo is None else self.lo
        hi = 20 * scale if self.hi is None else self.hi
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ParameterError(f"bad scan interval [{lo}, {hi}]")
        if self.points < 2:
            raise ParameterError("scan needs at least 2 points")
        return lo, hi


def solve_real(spec: EnergyEquationSpec, scan: ScanConfig = ScanConfig(), tol: float | None = None) -> list[EnergyRoot]:
    """All real roots in the scan window, ascending.

    The residual is sampled on a uniform grid; samples with a negative radicand
    are masked out, and every sign change between two valid neighbours is
    refined by bisection to |dE| < tol.
    """
    if not spec.variant.is_real:
        raise SpectraError(f"{spec.variant.value} needs solve_complex")
    M = spec.params.M
    tol = 1e-12 * max(1.0, abs(M)) if tol is None else tol
    lo, hi = scan.window(M)
    grid = np.linspace(lo, hi, scan.points)
    R = radicand(spec, grid)
    values = np.real(residual(spec, grid))
    values[R < 0] = np.nan

    def f(E):
        return real_residual(spec, E)

    a, b = values[:-1], values[1:]
    ok = np.isfinite(a) & np.isfinite(b)
    hits = np.flatnonzero(ok & ((a == 0) | (a * b < 0)))
    roots = []
    for i in hits:
        if a[i] == 0:
            E, iters = grid[i], 0
        else:
            E, info = bisect(f, grid[i], grid[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=400, full_output=True)
            iters = info.iterations
        radicand_ok, normalizable = _flags(spec, E)
        res = residual(spec, E)
        roots.append(EnergyRoot(complex(E), complex(res), iters, radicand_ok, normalizable, True))
    if values[-1] == 0:
        E = grid[-1]
        radicand_ok, normalizable = _flags(spec, E)
        roots.append(EnergyRoot(complex(E), 0j, 0, radicand_ok, normalizable, True))
    if not roots:
        raise NoRootInInterval(f"{spec.variant.value}: no sign change in [{lo:g}, {hi:g}]")
    return roots


def solve_complex(
    spec: EnergyEquationSpec,
    seed: complex,
    tol: float = 1e-10,
    max_iter: int = 200,
    strict: bool = False,
) -> EnergyRoot:
    """Damped Newton with a central-difference derivative.

    The step is halved (up to 30 times) until |residual| decreases.  Without
    convergence the best iterate is returned with ``bracket_converged=False``,
    or NonConvergence is raised when ``strict``.
    """
    E = complex(seed)
    f = complex(residual(spec, E))
    best = (abs(f), E, f)
    it = 0
    while abs(f) >= tol and it < max_iter:
        it += 1
        h = 1e-7 * (1 + abs(E))
        df = (complex(residual(spec, E + h)) - complex(residual(spec, E - h))) / (2 * h)
        if df == 0 or not np.isfinite(df):
            break
        step = f / df
        t = 1.0
        for _ in range(30):
            trial = E - t * step
            f_trial = complex(residual(spec, trial))
            if np.isfinite(f_trial) and abs(f_trial) < abs(f):
                break
            t *= 0.5
        else:
            break
        E, f = trial, f_trial
        if abs(f) < best[0]:
            best = (abs(f), E, f)
    _, E, f = best
    converged = abs(f) < tol
    if converged:
        # one polishing step: Newton converges quadratically, so the root then
        # sits at round-off level rather than merely at |residual| < tol
        h = 1e-7 * (1 + abs(E))
        df = (complex(residual(spec, E + h)) - complex(residual(spec, E - h))) / (2 * h)
        if df != 0 and np.isfinite(df):
            trial = E - f / df
            f_trial = complex(residual(spec, trial))
            if abs(f_trial) <= abs(f):
                E, f = trial, f_trial
    if strict and not converged:
        raise NonConvergence(f"no convergence from seed {seed}: |residual| = {abs(f):.3e}")
    radicand_ok, normalizable = _flags(spec, E)
    return EnergyRoot(E, f, it, radicand_ok, normalizable, converged)


# --- published tables ---------------------------------------------------------


@dataclass(frozen=True)
class TableEntry:
    D: int
    n: int
    alpha: float
    E: float


def load_table(source: str | Path | io.TextIOBase) -> list[TableEntry]:
    """Read a D,n,alpha,E CSV; locale-independent ('.' radix)."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return load_table(fh)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise TableFormatError("empty table") from None
    if header != ["D", "n", "alpha", "E"]:
        raise TableFormatError(f"expected header D,n,alpha,E, got {','.join(header)}")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise TableFormatError(f"line {lineno}: expected 4 fields, got {len(row)}")
        try:
            entries.append(TableEntry(int(row[0]), int(row[1]), float(row[2]), float(row[3])))
        except ValueError as exc:
            raise TableFormatError(f"line {lineno}: {exc}") from None
    return entries


def bundled_table(name: str) -> list[TableEntry]:
    path = Path(__file__).parent / "data" / f"{name}.csv"
    return load_table(path)


@dataclass(frozen=True)
class AuditRecord:
    D: int
    n: int
    alpha: float
    E_published: float
    E_computed: float
    abs_dE: float
    residual_of_published: float
    status: str


@dataclass
class TableAuditReport:
    records: list[AuditRecord]
    tol_table: float
    variant: Variant
    summary: dict = field(default_factory=dict)

    @property
    def matches(self) -> list[AuditRecord]:
        return [r for r in self.records if r.status == "Match"]

    @property
    def outliers(self) -> list[AuditRecord]:
        return [r for r in self.records if r.status == "Outlier"]


def spec_for_entry(base: ModelParams, variant: Variant, D: int, n: int, alpha: float) -> EnergyEquationSpec:
    params = ModelParams(M=base.M, C=base.C, V0=base.V0, S0=base.S0, alpha=alpha, q=base.q, symmetry=base.symmetry)
    return EnergyEquationSpec(params, QuantumNumbers.from_principal(D, n), variant)


def _offset_summary(outliers: Sequence[AuditRecord]) -> dict:
    if not outliers:
        return {"pattern": "none"}
    offsets = np.array([r.E_published - r.E_computed for r in outliers])
    nearest = np.round(offsets)
    integer_like = bool(np.all(nearest != 0) and np.all(np.abs(offsets - nearest) < 1e-2))
    if integer_like and np.all(nearest == nearest[0]):
        return {
            "pattern": "integer_offset",
            "offset": float(nearest[0]),
            "max_fractional_mismatch": float(np.max(np.abs(offsets - nearest))),
        }
    return {
        "pattern": "scattered",
        "median_offset": float(np.median(offsets)),
        "max_abs_offset": float(np.max(np.abs(offsets))),
    }


def audit_table(
    table: Iterable[TableEntry],
    base: ModelParams,
    variant: Variant = Variant.SPIN_TRIG,
    tol_table: float = 1e-4,
    scan: ScanConfig = ScanConfig(),
) -> TableAuditReport:
    """Compare published energies with solver roots entry by entry.

    The nearest root to each published value is reported together with the
    residual of the published value itself; |dE| <= tol_table is a Match.
    """
    records = []
    for entry in table:
        spec = spec_for_entry(base, variant, entry.D, entry.n, entry.alpha)
        try:
            roots = solve_real(spec, scan)
            E_c = min((r.E.real for r in roots), key=lambda e: (abs(e - entry.E), e))
        except NoRootInInterval:
            E_c = math.nan
        res_pub = float(np.real(residual(spec, entry.E)))
        dE = abs(E_c - entry.E)
        status = "Match" if dE <= tol_table else "Outlier"
        records.append(AuditRecord(entry.D, entry.n, entry.alpha, entry.E, E_c, dE, res_pub, status))
    report = TableAuditReport(records, tol_table, Variant(variant))
    report.summary = {
        "entries": len(records),
        "matches": len(report.matches),
        "outliers": len(report.outliers),
        "offset": _offset_summary(report.outliers),
    }
    return report
