"""Command-line interface: spectrum | wavefunction | audit | oracle | special.

Exit codes: 0 ok, 2 a requested state has no root, 3 audit outliers,
64 usage/config error, 65 malformed table, 74 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import oracle, spectra, wavefunctions
from .core import ModelParams, QuantumNumbers, ScarfError, Symmetry

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_NO_ROOT = 2
EXIT_OUTLIERS = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_IOERR = 74


class UsageError(Exception):
    pass


# --- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    M: float = 1.0
    C: float = 1.0
    V0: float = 1.0
    S0: float = 1.0
    q: float = 1.0
    alphas: tuple[float, ...] = (0.01,)
    dims: tuple[int, ...] = (3,)
    ns: tuple[int, ...] = (1,)
    l: int = 0
    aligned: bool = False
    variants: tuple[str, ...] = ("SpinTrig",)
    complex_depths: tuple[float, float, float, float] | None = None
    scan_lo: float | None = None
    scan_hi: float | None = None
    scan_points: int = 10_000
    tol: float = 1e-12
    seed_re: float | None = None
    seed_im: float = 0.0
    newton_tol: float = 1e-10
    grid_points: int = 20_000
    richardson: bool = True
    centrifugal_mode: str = "PaperCos"
    boundary_offset: float = 1e-6
    tol_table: float = 1e-4
    table: str = "table1"
    points: int = 4001
    format: str = "csv"
    out: str | None = None

    def validate(self) -> "RunConfig":
        if not (self.alphas and self.dims and self.ns and self.variants):
            raise UsageError("empty sweep: alpha, D, n and variant lists must be non-empty")
        for name in ("tol", "newton_tol", "tol_table", "boundary_offset"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be > 0")
        if any(not a > 0 for a in self.alphas):
            raise UsageError("alpha values must be > 0")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if self.scan_points < 2 or self.points < 2:
            raise UsageError("scan_points and points must be >= 2")
        if self.grid_points < 100:
            raise UsageError("grid_points must be >= 100")
        try:
            for v in self.variants:
                spectra.Variant(v)
            oracle.CentrifugalMode(self.centrifugal_mode)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return self

    def params(self, alpha: float, variant: spectra.Variant) -> ModelParams:
        sym = Symmetry.SPIN if variant.is_spin else Symmetry.PSEUDOSPIN
        return ModelParams(M=self.M, C=self.C, V0=self.V0, S0=self.S0, alpha=alpha, q=self.q, symmetry=sym)

    def sweep(self) -> list[tuple[str, int, int, float]]:
        """Lexicographic (variant, D, n, alpha) order."""
        return [(v, D, n, a) for v in self.variants for D in self.dims for n in self.ns for a in self.alphas]


_SECTIONS = {
    "model": {"M": float, "C": float, "V0": float, "S0": float, "q": float, "alpha": "floats"},
    "quantum": {"D": "ints", "n": "ints", "l": int, "aligned": "bool"},
    "solver": {
        "variant": "strs",
        "scan_lo": float,
        "scan_hi": float,
        "scan_points": int,
        "tol": float,
        "seed_re": float,
        "seed_im": float,
        "newton_tol": float,
        "grid_points": int,
        "richardson": "bool",
        "centrifugal_mode": str,
        "boundary_offset": float,
        "tol_table": float,
        "table": str,
        "points": int,
    },
    "complex": {"V1": float, "V2": float, "S1": float, "S2": float},
    "output": {"format": str, "path": str},
}
_FIELD = {"alpha": "alphas", "D": "dims", "n": "ns", "variant": "variants", "path": "out"}


def _parse_ints(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi = (int(p) for p in part.split(":", 1))
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _parse_strs(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS = {"ints": _parse_ints, "floats": _parse_floats, "strs": _parse_strs, "bool": _parse_bool}


def _convert(kind, raw: str):
    return _PARSERS[kind](raw) if isinstance(kind, str) else kind(raw.strip())


def load_config(text: str, base: RunConfig = RunConfig()) -> RunConfig:
    """Parse [model], [quantum], [solver], [complex], [output] key = value sections."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"config: {exc}") from None
    updates: dict = {}
    depths = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise UsageError(f"config: unknown section [{section}]")
        keys = _SECTIONS[section]
        for key, raw in cp.items(section):
            if key not in keys:
                raise UsageError(f"config: unknown key {key!r} in [{section}]")
            try:
                value = _convert(keys[key], raw)
            except ValueError as exc:
                raise UsageError(f"config: [{section}] {key}: {exc}") from None
            if section == "complex":
                depths[key] = value
            else:
                updates[_FIELD.get(key, key)] = value
    if depths:
        missing = {"V1", "V2", "S1", "S2"} - depths.keys()
        if missing:
            raise UsageError(f"config: [complex] missing {sorted(missing)}")
        updates["complex_depths"] = (depths["V1"], depths["V2"], depths["S1"], depths["S2"])
    return replace(base, **updates)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.command == "audit":
        cfg = replace(cfg, variants=("SpinTrig",))
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise IOError(f"cannot read config {args.config}: {exc}") from exc
        cfg = load_config(text, cfg)
    overrides = {}
    try:
        if args.alpha is not None:
            overrides["alphas"] = _parse_floats(args.alpha)
        if args.dim is not None:
            overrides["dims"] = _parse_ints(args.dim)
        if args.n is not None:
            overrides["ns"] = _parse_ints(args.n)
        if args.variant is not None:
            overrides["variants"] = _parse_strs(args.variant)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format is not None:
        overrides["format"] = args.format
    if args.out is not None:
        overrides["out"] = args.out
    if getattr(args, "table", None) is not None:
        overrides["table"] = args.table
    return replace(cfg, **overrides).validate()


# --- formatting and output -----------------------------------------------------


def fmt(x) -> str:
    """12 significant digits, '.' radix; booleans as 0/1, NaN as 'nan'."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str):
        return x
    x = float(x)
    return None if not math.isfinite(x) else float(format(x, ".12g"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _json_value(obj.real), "im": _json_value(obj.imag)}
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, (int, float, np.integer, np.floating, np.bool_)):
        return _json_value(obj)
    return str(obj)


@dataclass
class Output:
    command: str
    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict)


def render(out: Output, cfg: RunConfig) -> str:
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": out.command,
            "config": _jsonable(asdict(cfg)),
            "meta": _jsonable(out.meta),
            "columns": out.columns,
            "rows": [[_json_value(v) for v in row] for row in out.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(",".join(out.columns) + "\n")
    for row in out.rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def sidecar(out: Output, cfg: RunConfig) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": out.command,
        "config": _jsonable(asdict(cfg)),
        "columns": out.columns,
        "meta": _jsonable(out.meta),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_output(out: Output, cfg: RunConfig, stdout) -> None:
    body = render(out, cfg)
    if cfg.out is None:
        stdout.write(body)
        return
    path = Path(cfg.out)
    with open(path, "w", newline="\n") as fh:
        fh.write(body)
    with open(path.with_name(path.name + ".meta.json"), "w", newline="\n") as fh:
        fh.write(sidecar(out, cfg))


def _threads() -> int:
    raw = os.environ.get("SCARF_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Ordered map; results come back in input order whatever the completion order."""
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- commands ----------------------------------------------------------------

_ROOT_COLUMNS = ["variant", "D", "n", "alpha", "E_re", "E_im", "residual_abs", "iterations", "radicand_ok", "normalizable", "converged"]


def _root_row(v, D, n, a, root: spectra.EnergyRoot | None) -> list:
    if root is None:
        return [v, D, n, a, math.nan, math.nan, math.nan, 0, False, False, False]
    return [v, D, n, a, root.E.real, root.E.imag, abs(root.residual), root.iterations, root.radicand_ok, root.normalizable, root.bracket_converged]


def _spec(cfg: RunConfig, v: str, D: int, n: int, a: float) -> spectra.EnergyEquationSpec:
    variant = spectra.Variant(v)
    depths = cfg.complex_depths if variant.needs_complex_depths else None
    return spectra.EnergyEquationSpec(cfg.params(a, variant), QuantumNumbers.from_principal(D, n, cfg.l, cfg.aligned), variant, depths)


def _solve_real_point(cfg: RunConfig, item) -> spectra.EnergyRoot | None:
    spec = _spec(cfg, *item)
    scan = spectra.ScanConfig(cfg.scan_lo, cfg.scan_hi, cfg.scan_points)
    try:
        roots = spectra.solve_real(spec, scan, cfg.tol)
    except spectra.NoRootInInterval:
        return None
    good = [r for r in roots if r.normalizable]
    return (good or roots)[0]


def _default_seed(cfg: RunConfig, spec: spectra.EnergyEquationSpec) -> complex:
    if cfg.seed_re is not None:
        return complex(cfg.seed_re, cfg.seed_im)
    # the trigonometric root is a natural starting point; fall back to M
    return complex(cfg.M + 0.5, cfg.seed_im)


def _solve_complex_point(cfg: RunConfig, item) -> spectra.EnergyRoot | None:
    spec = _spec(cfg, *item)
    return spectra.solve_complex(spec, _default_seed(cfg, spec), cfg.newton_tol)


def cmd_spectrum(cfg: RunConfig, stdout) -> int:
    items = cfg.sweep()

    def solve(item):
        variant = spectra.Variant(item[0])
        if variant.is_real:
            return _solve_real_point(cfg, item)
        return _solve_complex_point(cfg, item)

    roots = parallel_map(solve, items)
    rows = [_root_row(*item, root) for item, root in zip(items, roots)]
    write_output(Output("spectrum", _ROOT_COLUMNS, rows), cfg, stdout)
    missing = any(r is None or not r.bracket_converged for r in roots)
    return EXIT_NO_ROOT if missing else EXIT_OK


def cmd_special(cfg: RunConfig, stdout) -> int:
    for v in cfg.variants:
        if spectra.Variant(v).is_real:
            raise UsageError(f"special needs a PT, q-deformed or non-PT variant, got {v}")
        if spectra.Variant(v).needs_complex_depths and cfg.complex_depths is None:
            raise UsageError(f"{v} needs a [complex] section with V1, V2, S1, S2")
    items = cfg.sweep()
    roots = parallel_map(lambda item: _solve_complex_point(cfg, item), items)
    rows = [_root_row(*item, root) for item, root in zip(items, roots)]
    write_output(Output("special", _ROOT_COLUMNS, rows), cfg, stdout)
    return EXIT_OK if all(r.bracket_converged for r in roots) else EXIT_NO_ROOT


def _load_audit_table(name: str) -> list[spectra.TableEntry]:
    if name in ("table1", "table2"):
        return spectra.bundled_table(name)
    return spectra.load_table(name)


def cmd_audit(cfg: RunConfig, stdout) -> int:
    if len(cfg.variants) != 1 or not spectra.Variant(cfg.variants[0]).is_real:
        raise UsageError("audit needs exactly one of SpinTrig, PseudospinTrig")
    variant = spectra.Variant(cfg.variants[0])
    table = _load_audit_table(cfg.table)
    base = cfg.params(cfg.alphas[0], variant)
    scan = spectra.ScanConfig(cfg.scan_lo, cfg.scan_hi, cfg.scan_points)
    report = spectra.audit_table(table, base, variant, cfg.tol_table, scan)
    columns = ["D", "n", "alpha", "E_published", "E_computed", "abs_dE", "residual_of_published", "status"]
    rows = [[r.D, r.n, r.alpha, r.E_published, r.E_computed, r.abs_dE, r.residual_of_published, r.status] for r in report.records]
    write_output(Output("audit", columns, rows, {"summary": report.summary}), cfg, stdout)
    return EXIT_OUTLIERS if report.outliers else EXIT_OK


def _single_state(cfg: RunConfig) -> tuple[spectra.Variant, int, int, float]:
    if len(cfg.sweep()) != 1:
        raise UsageError("wavefunction needs exactly one (variant, D, n, alpha)")
    v, D, n, a = cfg.sweep()[0]
    variant = spectra.Variant(v)
    if not variant.is_real:
        raise UsageError("wavefunction needs SpinTrig or PseudospinTrig")
    return variant, D, n, a


def cmd_wavefunction(cfg: RunConfig, stdout) -> int:
    variant, D, n, a = _single_state(cfg)
    qn = QuantumNumbers.from_principal(D, n, cfg.l, cfg.aligned)
    if qn.n_r is None:
        raise UsageError(f"n={n}, l={cfg.l} does not give an integer radial number (n - l - 1 must be even)")
    root = _solve_real_point(cfg, (variant.value, D, n, a))
    if root is None or not root.normalizable:
        return EXIT_NO_ROOT
    params = cfg.params(a, variant)
    state = wavefunctions.make_state(params, qn, root.E.real)
    L = state.length
    r = L * np.arange(1, cfg.points + 1) / (cfg.points + 1)
    F = wavefunctions.upper_component(state, r)
    G = wavefunctions.lower_component(state, r)
    z = wavefunctions.z_of_r(r, a)
    rows = [[ri, zi, f.real, f.imag, g.real, g.imag] for ri, zi, f, g in zip(r, z, F, G)]
    meta = {
        "variant": variant.value,
        "D": D,
        "n": n,
        "n_r": qn.n_r,
        "l": cfg.l,
        "kappa": qn.kappa,
        "E": state.E,
        "nu": state.nu,
        "lambda": state.lambda_cap,
        "log_norm": state.log_norm,
        "nodes": wavefunctions.count_nodes(state),
    }
    write_output(Output("wavefunction", ["r", "z", "Re_F", "Im_F", "Re_G", "Im_G"], rows, meta), cfg, stdout)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, stdout) -> int:
    for v in cfg.variants:
        if not spectra.Variant(v).is_real:
            raise UsageError("oracle needs SpinTrig or PseudospinTrig")
    items = cfg.sweep()
    for v, D, n, a in items:
        if QuantumNumbers.from_principal(D, n, cfg.l, cfg.aligned).n_r is None:
            raise UsageError(f"n={n}, l={cfg.l}: n - l - 1 must be even and >= 0 for the oracle")

    def run(item):
        v, D, n, a = item
        variant = spectra.Variant(v)
        params = cfg.params(a, variant)
        qn = QuantumNumbers.from_principal(D, n, cfg.l, cfg.aligned)
        op_cfg = oracle.OperatorConfig(cfg.centrifugal_mode, cfg.grid_points, cfg.boundary_offset, cfg.richardson)
        try:
            if cfg.richardson:
                start = max(100, (cfg.grid_points + 1) // 4 - 1)
                return oracle.convergence_study(params, qn, replace(op_cfg, grid_points=start))
            return oracle.self_consistent_energy(params, qn, op_cfg)
        except oracle.NoBracket:
            return None

    results = parallel_map(run, items)
    columns = ["variant", "D", "n", "alpha", "grid_points", "E", "estimated_error"]
    rows, orders, missing = [], [], False
    for (v, D, n, a), res in zip(items, results):
        if res is None:
            missing = True
            rows.append([v, D, n, a, 0, math.nan, math.nan])
            continue
        if cfg.richardson:
            for g, E, err in zip(res.grid_points, res.energies, res.estimated_errors):
                rows.append([v, D, n, a, g, E, err])
            rows.append([v, D, n, a, "richardson", res.extrapolated, abs(res.energies[-1] - res.extrapolated)])
            orders.append({"variant": v, "D": D, "n": n, "alpha": a, "order": res.order})
        else:
            rows.append([v, D, n, a, res.grid_points[-1], res.E, res.error_estimate])
    write_output(Output("oracle", columns, rows, {"orders": orders}), cfg, stdout)
    return EXIT_NO_ROOT if missing else EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "audit": cmd_audit,
    "oracle": cmd_oracle,
    "special": cmd_special,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scarfdirac", description="Dirac bound states in a trigonometric Scarf potential")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config with [model], [quantum], [solver], [complex], [output]")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--out", help="output path (default: stdout); a .meta.json sidecar is written next to it")
        p.add_argument("--alpha", help="comma-separated alpha values")
        p.add_argument("--dim", help="comma-separated D values or a:b ranges")
        p.add_argument("--n", help="comma-separated n values or a:b ranges")
        p.add_argument("--variant", help="comma-separated variants")
        if name == "audit":
            p.add_argument("--table", help="CSV with header D,n,alpha,E, or table1 / table2 for the bundled data")
    return parser


def main(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, stdout)
    except UsageError as exc:
        sys.stderr.write(f"scarfdirac: {exc}\n")
        return EXIT_USAGE
    except spectra.TableFormatError as exc:
        sys.stderr.write(f"scarfdirac: malformed table: {exc}\n")
        return EXIT_DATAERR
    except OSError as exc:
        sys.stderr.write(f"scarfdirac: I/O error: {exc}\n")
        return EXIT_IOERR
    except ScarfError as exc:
        sys.stderr.write(f"scarfdirac: {exc}\n")
        return EXIT_NO_ROOT


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
