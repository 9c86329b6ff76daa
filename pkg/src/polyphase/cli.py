"""Command-line front end.

Every subcommand is a thin adapter over library calls. Exit codes: 0 on
success, 1 on a numerical failure or failed self-test, 2 on invalid input
(one-line diagnostic on stderr), 3 on I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import angles, bounds, experiments, thresholds
from .duals import Family
from .errors import ConvergenceError, DomainError
from .thresholds import PhaseCurve, TransitionKind

__all__ = [
    "CONFIG_KEYS",
    "ConfigError",
    "parse_config",
    "parse_grid",
    "format_number",
    "emit_csv",
    "emit_svg_phase_diagram",
    "run",
    "main",
]

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

CONFIG_KEYS = frozenset({
    "family", "kind", "N", "n_list", "k_rule", "trials", "seed", "delta_grid", "out_path", "format",
    # error-correction and level-curve runs
    "n", "k", "error_model", "level",
})


class ConfigError(DomainError):
    pass


class _UsageError(Exception):
    pass


# --- parsing -----------------------------------------------------------------


def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment. Unknown or
    repeated keys are errors."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"config line {lineno}: expected key=value")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _int(value, name: str) -> int:
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _float(value, name: str) -> float:
    try:
        x = float(str(value).strip())
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if math.isnan(x):
        raise ConfigError(f"{name} must not be NaN")
    return x


def _int_list(value, name: str) -> tuple[int, ...]:
    items = [v for v in str(value).replace(" ", "").split(",") if v]
    if not items:
        raise ConfigError(f"{name} is empty")
    return tuple(_int(v, name) for v in items)


def parse_grid(text: str) -> tuple[float, ...]:
    """Comma list (``0.1,0.5``), linear range ``lo:hi:count`` or geometric
    range ``log:lo:hi:count``."""
    text = str(text).strip()
    parts = text.split(":")
    if len(parts) == 1:
        vals = [_float(v, "delta") for v in text.split(",") if v.strip()]
    elif len(parts) in (3, 4):
        geometric = len(parts) == 4
        if geometric and parts[0] != "log":
            raise ConfigError(f"bad grid {text!r}")
        lo, hi = _float(parts[-3], "grid start"), _float(parts[-2], "grid end")
        count = _int(parts[-1], "grid count")
        if count < 1:
            raise ConfigError("grid count must be positive")
        if geometric:
            if lo <= 0 or hi <= 0:
                raise ConfigError("geometric grid needs positive bounds")
            vals = list(np.geomspace(lo, hi, count))
        else:
            vals = list(np.linspace(lo, hi, count))
    else:
        raise ConfigError(f"bad grid {text!r}")
    if not vals:
        raise ConfigError("grid is empty")
    return tuple(float(v) for v in vals)


def _families(value) -> list[Family]:
    if str(value).lower() in ("all", "both"):
        return [Family.SIMPLEX, Family.CROSS]
    return [Family.parse(value)]


def _kinds(value) -> list[TransitionKind]:
    if str(value).lower() in ("all", "both"):
        return [TransitionKind.WEAK, TransitionKind.STRONG]
    return [TransitionKind.parse(value)]


# --- output ---------------------------------------------------------------------


def format_number(x) -> str:
    """Locale-independent text for CSV cells; floats get 12 significant digits."""
    if isinstance(x, enum.Enum):
        return str(x.value)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_text(table) -> str:
    rows = list(table)
    if not rows:
        raise DomainError("refusing to write an empty table")
    header = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if list(row.keys()) != header:
            raise DomainError("table rows have inconsistent columns")
        w.writerow([format_number(row[h]) for h in header])
    return buf.getvalue()


def emit_csv(table, path) -> None:
    """Write a list of same-keyed dicts as UTF-8 CSV, atomically."""
    _atomic_write(path, _csv_text(table))


def curve_rows(curve: PhaseCurve) -> list[dict]:
    return [{"family": curve.family.value, "kind": curve.kind.value, "delta": d, "rho": r}
            for d, r in curve.samples]


_PALETTE = {
    (Family.SIMPLEX, TransitionKind.WEAK): "#1f5fbf",
    (Family.CROSS, TransitionKind.WEAK): "#1f9f4f",
    (Family.SIMPLEX, TransitionKind.STRONG): "#c03030",
    (Family.CROSS, TransitionKind.STRONG): "#8040b0",
}


def _svg_text(curves, grid=None, width: int = 640, height: int = 480) -> str:
    curves = list(curves)
    if not curves:
        raise DomainError("at least one curve is required")
    left, right, top, bottom = 60, 20, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def px(d):
        return left + d * pw

    def py(r):
        return top + (1.0 - r) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    cells = list(grid.cells) if grid is not None else []
    if cells:
        N = grid.N
        ns = sorted({c.n for c in cells})
        dw = min([b - a for a, b in zip(ns, ns[1:])] or [max(1, N // 20)]) / N
        out.append('<g id="success-cells">')
        for c in cells:
            ks = sorted({d.k for d in cells if d.n == c.n})
            dh = min([b - a for a, b in zip(ks, ks[1:])] or [max(1, c.n // 20)]) / c.n
            d, r = c.n / N, c.k / c.n
            shade = int(round(255 * (1.0 - c.fraction)))
            out.append(
                f'<rect x="{px(d - dw / 2):.2f}" y="{py(r + dh / 2):.2f}" width="{dw * pw:.2f}" '
                f'height="{dh * ph:.2f}" fill="rgb({shade},{shade},{shade})"/>')
        out.append("</g>")
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for i in range(5):
        t = i / 4
        out.append(f'<line x1="{px(t):.2f}" y1="{py(0):.2f}" x2="{px(t):.2f}" y2="{py(0) + 5:.2f}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{py(0) + 20:.2f}" font-size="12" text-anchor="middle">{t:g}</text>')
        out.append(f'<line x1="{px(0) - 5:.2f}" y1="{py(t):.2f}" x2="{px(0):.2f}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{px(0) - 8:.2f}" y="{py(t) + 4:.2f}" font-size="12" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{px(0.5):.2f}" y="{height - 10}" font-size="14" text-anchor="middle">delta = n/N</text>')
    out.append(f'<text x="15" y="{py(0.5):.2f}" font-size="14" text-anchor="middle" '
               f'transform="rotate(-90 15 {py(0.5):.2f})">rho = k/n</text>')
    for i, c in enumerate(curves):
        color = _PALETTE.get((c.family, c.kind), "black")
        pts = " ".join(f"{px(d):.3f},{py(r):.3f}" for d, r in c.samples)
        out.append(f'<polyline id="curve-{c.kind.value}-{c.family.value}" points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + 10}" y="{top + 18 + 16 * i}" font-size="12" fill="{color}">'
                   f'{c.kind.value} {c.family.value}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_phase_diagram(curves, grid=None, path=None) -> str:
    """Static SVG of phase curves, optionally over success-fraction cells.

    Returns the SVG text and writes it atomically when ``path`` is given.
    """
    text = _svg_text(curves, grid)
    if path is not None:
        _atomic_write(path, text)
    return text


def _emit(rows, out_path, stdout) -> None:
    if out_path:
        emit_csv(rows, out_path)
    else:
        stdout.write(_csv_text(rows))


# --- subcommands ----------------------------------------------------------------


def _load_config(args) -> dict[str, str]:
    if getattr(args, "config", None) is None:
        return {}
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"config {args.config} is not UTF-8 text") from None
    return parse_config(text)


def _pick(args, cfg, name, key=None, default=None):
    """Command-line flag wins over the config file, which wins over the default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(key or name, default)


def _cmd_thresholds(args, out):
    cfg = _load_config(args)
    fams = _families(_pick(args, cfg, "family", default="all"))
    kinds = _kinds(_pick(args, cfg, "kind", default="all"))
    grid = parse_grid(_pick(args, cfg, "delta", "delta_grid", default="0.5"))
    curves = [thresholds.phase_curve(f, k, grid) for k in kinds for f in fams]
    rows = [row for c in curves for row in curve_rows(c)]
    out_path = _pick(args, cfg, "out", "out_path")
    if len(rows) == 1 and not out_path:
        out.write(format_number(rows[0]["rho"]) + "\n")
    else:
        _emit(rows, out_path, out)
    if args.svg:
        emit_svg_phase_diagram(curves, None, args.svg)


def _cmd_bound(args, out):
    fams = _families(args.family)
    kinds = _kinds(args.kind)
    rows = []
    for kind in kinds:
        for fam in fams:
            fn = bounds.strong_bound if kind is TransitionKind.STRONG else bounds.weak_bound
            r = fn(fam, args.k, args.n, args.N)
            rows.append({"family": fam.value, "kind": kind.value, "k": args.k, "n": args.n, "N": args.N,
                         "log_bound": r.log_value, "bound": r.value,
                         "ell": -1 if r.ell is None else r.ell})
    if args.rv:
        rv = bounds.rv_bound(args.k, args.n, args.N)
        for row in rows:
            row["rv_bound"] = rv
    _emit(rows, args.out, out)


def _cmd_levelcurve(args, out):
    cfg = _load_config(args)
    fams = _families(_pick(args, cfg, "family", default="simplex"))
    kinds = _kinds(_pick(args, cfg, "kind", default="strong"))
    N = _int(_pick(args, cfg, "N", default=200), "N")
    level = _float(_pick(args, cfg, "level", default=1.0), "level")
    grid = parse_grid(_pick(args, cfg, "delta", "delta_grid", default="0.05:0.95:19"))
    curves = [bounds.level_curve(f, k, N, level, grid) for k in kinds for f in fams]
    rows = [{"family": c.family.value, "kind": c.kind.value, "N": N, "delta": d, "rho_level": r}
            for c in curves for d, r in c.samples]
    _emit(rows, _pick(args, cfg, "out", "out_path"), out)
    if args.svg:
        emit_svg_phase_diagram(curves, None, args.svg)


def _cmd_angles(args, out):
    method = angles.AngleMethod(args.method)
    what = args.what
    if what == "external":
        kind = (angles.AngleKind.EXTERNAL_SIMPLEX if Family.parse(args.family) is Family.SIMPLEX
                else angles.AngleKind.EXTERNAL_CROSS)
        value = angles.evaluate(angles.AngleRequest(kind, _req(args.ell, "ell"), _req(args.N, "N"), method))
    elif what == "internal":
        value = angles.evaluate(angles.AngleRequest(angles.AngleKind.INTERNAL, _req(args.k, "k"),
                                                    _req(args.ell, "ell"), method))
    elif what == "delta":
        value = angles.discrepancy_delta(args.family, _req(args.k, "k"), _req(args.n, "n"), _req(args.N, "N"),
                                         method=method)
    else:
        value = angles.face_count(args.family, _req(args.k, "k"), _req(args.N, "N"))
    out.write(format_number(value) + "\n")


def _req(v, name):
    if v is None:
        raise _UsageError(f"--{name} is required here")
    return v


def experiment_config(cfg: dict[str, str]) -> experiments.ExperimentConfig:
    """Build an :class:`ExperimentConfig` from parsed config keys."""
    missing = [k for k in ("family", "N", "n_list") if k not in cfg]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")
    k_rule = cfg.get("k_rule", experiments.ELEVEN)
    if k_rule.strip() != experiments.ELEVEN:
        k_rule = _int_list(k_rule, "k_rule")
    return experiments.ExperimentConfig(
        family=Family.parse(cfg["family"]),
        N=_int(cfg["N"], "N"),
        n_list=_int_list(cfg["n_list"], "n_list"),
        k_rule=k_rule,
        trials_per_cell=_int(cfg.get("trials", 200), "trials"),
        master_seed=_int(cfg.get("seed", 0), "seed"),
    )


def _cmd_experiment(args, out):
    cfg = _load_config(args)
    for key in ("family", "N", "n_list", "k_rule", "trials", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = str(v)
    ecfg = experiment_config(cfg)
    result = experiments.success_grid(ecfg, workers=args.workers)
    fmt = cfg.get("format", "csv")
    out_path = args.out or cfg.get("out_path")
    if fmt == "csv":
        _emit(result.rows(), out_path, out)
    elif fmt == "svg":
        if not out_path:
            raise ConfigError("format=svg needs out_path")
        n_over_N = sorted({c.n / ecfg.N for c in result.cells})
        lo, hi = max(0.02, min(n_over_N) - 0.1), min(0.98, max(n_over_N) + 0.1)
        curve = thresholds.phase_curve(ecfg.family, TransitionKind.WEAK, np.linspace(lo, hi, 25))
        emit_svg_phase_diagram([curve], result, out_path)
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def _cmd_ecc(args, out):
    cfg = _load_config(args)
    get = lambda name, key, default: _pick(args, cfg, name, key, default)  # noqa: E731
    ecfg = experiments.EccConfig(
        N=_int(get("N", "N", 200), "N"),
        n=_int(get("n", "n", 100), "n"),
        k=_int(get("k", "k", 10), "k"),
        error_model=get("error_model", "error_model", "random_signed"),
        trials=_int(get("trials", "trials", 100), "trials"),
        master_seed=_int(get("seed", "seed", 0), "seed"),
    )
    trials = experiments.ecc_roundtrip(ecfg)
    rows = [{"trial": i, "exact": t.exact, "max_error": t.error, "lp_failed": t.lp_failed}
            for i, t in enumerate(trials)]
    out_path = get("out", "out_path", None)
    if out_path:
        emit_csv(rows, out_path)
    exact = sum(t.exact for t in trials)
    out.write(f"exact {exact}/{len(trials)} rate {format_number(exact / len(trials))}\n")


def _selftest_checks():
    from .linprog import LPInstance, Uniqueness, lp_solve
    ref = {("simplex", "weak"): 0.5581, ("cross", "weak"): 0.3848,
           ("simplex", "strong"): 0.1335, ("cross", "strong"): 0.0894}
    for (fam, kind), want in ref.items():
        got = thresholds.rho_threshold(fam, kind, 0.5)
        yield f"rho_{kind}_{fam}(0.5) = {got:.6f} (reference {want})", abs(got - want) <= 1e-3
    sol = lp_solve(LPInstance([1.0, 2.0], [[1.0, 1.0]], [1.0]))
    ok = sol.optimal and abs(sol.objective - 1.0) < 1e-12 and sol.unique is Uniqueness.CERTIFIED_UNIQUE
    yield "two-vertex LP", ok
    got = angles.internal_angle(0, 1, angles.AngleMethod.ORACLE)
    yield f"internal angle of a segment at a vertex = {got:.12f}", abs(got - 0.5) < 1e-9


def _cmd_selftest(args, out):
    ok = True
    for label, passed in _selftest_checks():
        out.write(f"{'PASS' if passed else 'FAIL'} {label}\n")
        ok &= passed
    return EXIT_OK if ok else EXIT_NUMERIC


# --- argument parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polyphase", description="Phase transitions for randomly projected polytopes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("thresholds", help="asymptotic rho thresholds")
    t.add_argument("--family", help="simplex, cross or all")
    t.add_argument("--kind", help="weak, strong or all")
    t.add_argument("--delta", help="value, comma list, lo:hi:count or log:lo:hi:count")
    t.add_argument("--config")
    t.add_argument("--out", help="CSV path (family,kind,delta,rho)")
    t.add_argument("--svg", help="optional phase-diagram path")

    b = sub.add_parser("bound", help="explicit finite-N bounds")
    b.add_argument("--family", default="all")
    b.add_argument("--kind", default="all")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--rv", action="store_true", help="add the Rudelson-Vershynin comparison column")
    b.add_argument("--out")

    lc = sub.add_parser("levelcurve", help="level set of a finite-N bound")
    lc.add_argument("--family")
    lc.add_argument("--kind")
    lc.add_argument("--N", type=int)
    lc.add_argument("--level", type=float)
    lc.add_argument("--delta")
    lc.add_argument("--config")
    lc.add_argument("--out", help="CSV path (family,kind,N,delta,rho_level)")
    lc.add_argument("--svg")

    a = sub.add_parser("angles", help="angles, face counts and the lost-face discrepancy")
    a.add_argument("what", choices=["external", "internal", "delta", "facecount"])
    a.add_argument("--family", default="simplex")
    a.add_argument("--method", default="quadrature", choices=[m.value for m in angles.AngleMethod])
    a.add_argument("--k", type=int)
    a.add_argument("--ell", type=int)
    a.add_argument("--n", type=int)
    a.add_argument("--N", type=int)

    e = sub.add_parser("experiment", help="l1 recovery success grid")
    e.add_argument("--config")
    e.add_argument("--family")
    e.add_argument("--N", type=int)
    e.add_argument("--n_list")
    e.add_argument("--k_rule")
    e.add_argument("--trials", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out")

    c = sub.add_parser("ecc", help="error-correction round trips")
    c.add_argument("--config")
    c.add_argument("--N", type=int)
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--error_model", choices=[m.value for m in experiments.ErrorModel])
    c.add_argument("--trials", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--out")

    sub.add_parser("selftest", help="quick numerical sanity checks")
    return p


_COMMANDS = {
    "thresholds": _cmd_thresholds,
    "bound": _cmd_bound,
    "levelcurve": _cmd_levelcurve,
    "angles": _cmd_angles,
    "experiment": _cmd_experiment,
    "ecc": _cmd_ecc,
    "selftest": _cmd_selftest,
}


def _one_line(exc) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def run(argv=None, *, stdout=None, stderr=None) -> int:
    """Execute one subcommand and return its exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        code = _COMMANDS[args.command](args, stdout)
        return EXIT_OK if code is None else code
    except (_UsageError, DomainError, ValueError, KeyError) as exc:
        stderr.write(f"polyphase: error: {_one_line(exc)}\n")
        return EXIT_USAGE
    except ConvergenceError as exc:
        stderr.write(f"polyphase: numerical failure: {_one_line(exc)}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        stderr.write(f"polyphase: I/O error: {_one_line(exc)}\n")
        return EXIT_IO


def main() -> None:
    sys.exit(run())
