"""Command-line front end.

Subcommands
-----------
roots      closed-form polynomial coefficients, real roots, oracle comparison
branches   full steady-state branch table with stability and cooling numbers
cool       single-point covariance solve on direct linearized parameters
sweep1d    1D sweep (config [sweep] section)
sweep2d    2D sweep
reproduce  canned figure recipes (fig2a, fig2c, ..., fig7)

Config files are INI-style with sections [system], [linearized], [sweep] and
[output]; keys match the dataclass field names.  ``--set key=value`` overrides
win over file values.  Output tables are CSV (comment headers prefixed '#')
or JSON ({meta, rows}); numbers are printed with 12 significant digits and
row order is deterministic, so identical configs give byte-identical files.
"""
from __future__ import annotations

import argparse
import configparser
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .cooling import (ZeroCoupling, build_noise_model, dark_mode_diagnostics,
                      solve_lyapunov)
from .params import (LinearizedParams, ParameterError, SystemParams,
                     validate_linearized, validate_params)
from .recipes import RECIPES, RecipeResult, run_recipe
from .stability import (build_drift_matrix, classify_branch_stability,
                        derive_linearized)
from .steady_state import (Diagnostic, build_polynomial, find_real_roots,
                           oracle_roots, roots_match, solve_branches)
from .sweep import Axis, SweepSpec, run_sweep

COLUMNS = ("branch_index", "n_p", "stable", "n1f", "n2f",
           "dark_overlap", "residual")


class ParseError(ValueError):
    """Malformed config document or override."""


class UnknownKey(ParseError):
    """A config key does not match any known field."""


@dataclass
class RunConfig:
    command: str
    system: Optional[SystemParams] = None
    linearized: Optional[LinearizedParams] = None
    sweep_mode: Optional[str] = None
    axes: tuple[Axis, ...] = ()
    out_path: str = "out.csv"
    out_format: str = "csv"
    oracle: bool = True
    gamma_fallback: bool = True
    convention: str = "kappa"
    scan_points: int = 4096
    threads: int = 1
    with_mech_damping: bool = False
    recipe: Optional[str] = None
    points: Optional[int] = None


_SYSTEM_FIELDS = {f.name for f in fields(SystemParams)}
_LINEARIZED_FIELDS = {f.name for f in fields(LinearizedParams)}
_SWEEP_KEYS = {"mode", "axis1", "axis2"}
_OUTPUT_KEYS = {"path", "format"}
_FLAG_KEYS = {"oracle", "gamma_fallback", "convention", "scan_points",
              "threads", "points", "with_mech_damping"}


def _to_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ParseError(f"key {key!r}: cannot parse {raw!r} as a number") from exc


def _parse_axis(key: str, raw: str) -> Axis:
    parts = raw.split()
    if len(parts) not in (4, 5):
        raise ParseError(
            f"{key!r} must be '<param> <lo> <hi> <points> [linear|log]', got {raw!r}")
    scale = parts[4] if len(parts) == 5 else "linear"
    try:
        return Axis(name=parts[0], lo=float(parts[1]), hi=float(parts[2]),
                    points=int(parts[3]), scale=scale)
    except ValueError as exc:
        raise ParseError(f"{key!r}: {exc}") from exc


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("on", "true", "1", "yes"):
        return True
    if low in ("off", "false", "0", "no"):
        return False
    raise ParseError(f"key {key!r}: expected on/off, got {raw!r}")


def parse_config(text: str, overrides: list[str] | None = None,
                 command: str = "roots") -> RunConfig:
    """Parse an INI config document and apply key=value overrides."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"config parse failure: {exc}") from exc
    known = {"system", "linearized", "sweep", "output"}
    for sec in cp.sections():
        if sec not in known:
            raise UnknownKey(f"unknown section [{sec}]")
    sys_kv = dict(cp["system"]) if cp.has_section("system") else None
    lin_kv = dict(cp["linearized"]) if cp.has_section("linearized") else None
    if sys_kv is not None and lin_kv is not None:
        raise ParseError("config must contain exactly one of [system] and "
                         "[linearized], not both")
    sweep_kv = dict(cp["sweep"]) if cp.has_section("sweep") else {}
    out_kv = dict(cp["output"]) if cp.has_section("output") else {}

    for kv, allowed, where in ((sys_kv or {}, _SYSTEM_FIELDS, "[system]"),
                               (lin_kv or {}, _LINEARIZED_FIELDS, "[linearized]"),
                               (sweep_kv, _SWEEP_KEYS, "[sweep]"),
                               (out_kv, _OUTPUT_KEYS, "[output]")):
        for key in kv:
            if key not in allowed:
                raise UnknownKey(f"unknown key {key!r} in {where}")

    flags: dict[str, str] = {}
    for item in overrides or []:
        if "=" not in item:
            raise ParseError(f"override {item!r} is not of the form key=value")
        key, _, val = item.partition("=")
        key = key.strip()
        val = val.strip()
        if sys_kv is not None and key in _SYSTEM_FIELDS:
            sys_kv[key] = val
        elif lin_kv is not None and key in _LINEARIZED_FIELDS:
            lin_kv[key] = val
        elif key in _SWEEP_KEYS:
            sweep_kv[key] = val
        elif key in _OUTPUT_KEYS:
            out_kv[key] = val
        elif key in _FLAG_KEYS:
            flags[key] = val
        else:
            raise UnknownKey(f"override key {key!r} matches no config field")

    cfg = RunConfig(command=command)
    if sys_kv is not None:
        kv = {}
        for key, raw in sys_kv.items():
            kv[key] = raw if key == "unit_label" else _to_float(key, raw)
        try:
            cfg.system = validate_params(SystemParams(**kv))
        except TypeError as exc:
            raise ParseError(f"[system]: {exc}") from exc
    if lin_kv is not None:
        kv = {}
        for key, raw in lin_kv.items():
            if key == "origin":
                kv[key] = raw
            elif key in ("g1_eff", "g2_eff", "g22"):
                try:
                    kv[key] = complex(raw.replace(" ", ""))
                except ValueError as exc:
                    raise ParseError(f"key {key!r}: {exc}") from exc
            else:
                kv[key] = _to_float(key, raw)
        kv.setdefault("origin", "direct")
        try:
            cfg.linearized = validate_linearized(LinearizedParams(**kv))
        except TypeError as exc:
            raise ParseError(f"[linearized]: {exc}") from exc
    if "mode" in sweep_kv:
        cfg.sweep_mode = sweep_kv["mode"].strip()
    axes = []
    for key in ("axis1", "axis2"):
        if key in sweep_kv:
            axes.append(_parse_axis(key, sweep_kv[key]))
    cfg.axes = tuple(axes)
    cfg.out_path = out_kv.get("path", cfg.out_path)
    cfg.out_format = out_kv.get("format", cfg.out_format).strip().lower()
    if cfg.out_format not in ("csv", "json"):
        raise ParseError(f"output format must be csv or json, "
                         f"got {cfg.out_format!r}")
    if "oracle" in flags:
        cfg.oracle = _parse_bool("oracle", flags["oracle"])
    if "gamma_fallback" in flags:
        cfg.gamma_fallback = _parse_bool("gamma_fallback", flags["gamma_fallback"])
    if "with_mech_damping" in flags:
        cfg.with_mech_damping = _parse_bool("with_mech_damping",
                                            flags["with_mech_damping"])
    if "convention" in flags:
        if flags["convention"] not in ("kappa", "omega1"):
            raise ParseError("convention must be kappa or omega1")
        cfg.convention = flags["convention"]
    if "scan_points" in flags:
        cfg.scan_points = int(_to_float("scan_points", flags["scan_points"]))
    if "threads" in flags:
        cfg.threads = int(_to_float("threads", flags["threads"]))
    if "points" in flags:
        cfg.points = int(_to_float("points", flags["points"]))
    return cfg


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, complex):
        return f"{value.real:.12g}{value.imag:+.12g}j" if value.imag else f"{value.real:.12g}"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _meta_for(cfg: RunConfig, extra: dict | None = None) -> dict:
    meta = {"tool": "quadmech", "version": __version__, "command": cfg.command}
    record = cfg.system if cfg.system is not None else cfg.linearized
    if record is not None:
        for f in fields(record):
            meta[f"param.{f.name}"] = getattr(record, f.name)
    meta.update({"flag.oracle": cfg.oracle,
                 "flag.gamma_fallback": cfg.gamma_fallback,
                 "flag.convention": cfg.convention,
                 "flag.scan_points": cfg.scan_points,
                 "flag.with_mech_damping": cfg.with_mech_damping})
    if extra:
        meta.update(extra)
    return meta


def write_table(path: str, fmt: str, columns: tuple[str, ...],
                rows: list[dict], meta: dict) -> None:
    buf = io.StringIO()
    if fmt == "csv":
        for key in sorted(meta):
            buf.write(f"# {key} = {_fmt(meta[key])}\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")
    else:
        payload = {"meta": {k: _fmt(v) for k, v in sorted(meta.items())},
                   "rows": [{c: _fmt(row.get(c)) for c in columns}
                            for row in rows]}
        json.dump(payload, buf, indent=1, sort_keys=True)
        buf.write("\n")
    Path(path).write_text(buf.getvalue())


def _write_diagnostics(path: str, diags: list[Diagnostic]) -> None:
    side = Path(path).with_suffix(Path(path).suffix + ".diagnostics.txt")
    lines = [f"{d.kind} cell={d.cell} {d.message}" for d in diags]
    side.write_text("\n".join(lines) + "\n")


_GNUPLOT_STUB = """\
# gnuplot stub for {tag}; data file: {data}
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
# columns: {columns}
{plot_line}
"""


def _write_plot_stub(path: str, tag: str, columns: tuple[str, ...]) -> None:
    data = Path(path).name
    if "n1f" in columns and len(columns) > 8:
        plot = f"splot '{data}' using 1:2:{columns.index('n1f') + 1} with points palette"
    elif "n1f" in columns:
        plot = f"plot '{data}' using 1:{columns.index('n1f') + 1} with lines"
    else:
        plot = f"plot '{data}' using 1:2 with points"
    stub = Path(path).with_suffix(".gp")
    stub.write_text(_GNUPLOT_STUB.format(tag=tag, data=data,
                                         columns=",".join(columns),
                                         plot_line=plot))


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_roots(cfg: RunConfig) -> tuple[list[dict], dict, list[Diagnostic]]:
    p = cfg.system
    if p is None:
        raise ParseError("the roots command needs a [system] section")
    coeffs = build_polynomial(p)
    poly = find_real_roots(coeffs)
    diags: list[Diagnostic] = []
    orc = oracle_roots(p, cfg.scan_points, diags) if cfg.oracle else []
    agree = roots_match(poly, orc) if cfg.oracle else None
    if cfg.oracle and not agree:
        diags.append(Diagnostic("coefficient-mismatch",
                                f"polynomial roots {poly} vs oracle {orc}"))
    rows = [dict(branch_index=k, n_p=r) for k, r in enumerate(poly)]
    extra = {f"coeff.c{m}": float(coeffs.c[m]) for m in range(8)}
    extra.update({"aux.x": coeffs.aux["x"], "aux.y": coeffs.aux["y"],
                  "aux.z": coeffs.aux["z"],
                  "oracle_roots": " ".join(_fmt(r) for r in orc),
                  "oracle_agreement": agree})
    return rows, extra, diags


def _cmd_branches(cfg: RunConfig) -> tuple[list[dict], dict, list[Diagnostic]]:
    p = cfg.system
    if p is None:
        raise ParseError("the branches command needs a [system] section")
    diags: list[Diagnostic] = []
    branches = solve_branches(p, oracle_mode=cfg.oracle,
                              scan_points=cfg.scan_points,
                              with_damping=cfg.with_mech_damping,
                              diagnostics=diags)
    rows = []
    for k, b in enumerate(branches):
        lp = derive_linearized(b, p)
        verdict = classify_branch_stability(lp, cfg.gamma_fallback)
        n1f = n2f = None
        dark = None
        try:
            dark = dark_mode_diagnostics(lp).dark_overlap
        except ZeroCoupling:
            pass
        if verdict.stable and (p.gamma1 > 0.0 or p.gamma2 > 0.0):
            cov = solve_lyapunov(build_drift_matrix(lp), build_noise_model(lp))
            n1f, n2f = cov.n1f, cov.n2f
        rows.append(dict(branch_index=k, n_p=b.n_p, stable=verdict.stable,
                         n1f=n1f, n2f=n2f, dark_overlap=dark,
                         residual=b.residual))
    return rows, {}, diags


def _cmd_cool(cfg: RunConfig) -> tuple[list[dict], dict, list[Diagnostic]]:
    lp = cfg.linearized
    if lp is None:
        raise ParseError("the cool command needs a [linearized] section")
    cov = solve_lyapunov(build_drift_matrix(lp), build_noise_model(lp))
    try:
        dark = dark_mode_diagnostics(lp).dark_overlap
    except ZeroCoupling:
        dark = None
    diags: list[Diagnostic] = []
    if not cov.physical:
        diags.append(Diagnostic("unstable-point",
                                "drift matrix unstable; phonon numbers "
                                "are formal only"))
    rows = [dict(branch_index=0, stable=cov.physical,
                 n1f=cov.n1f if cov.physical else None,
                 n2f=cov.n2f if cov.physical else None,
                 dark_overlap=dark, residual=cov.lyap_residual)]
    return rows, {"lyap_residual": cov.lyap_residual}, diags


def _cmd_sweep(cfg: RunConfig, ndim: int) -> tuple[tuple[str, ...], list[dict],
                                                   dict, list[Diagnostic]]:
    if len(cfg.axes) != ndim:
        raise ParseError(f"sweep{ndim}d needs exactly {ndim} axis definitions "
                         f"in [sweep]")
    mode = cfg.sweep_mode or ("cooling" if cfg.linearized is not None
                              else "root-count")
    base = cfg.linearized if mode == "cooling" else cfg.system
    if base is None:
        raise ParseError(f"mode {mode!r} needs the matching params section")
    spec = SweepSpec(axes=cfg.axes, base=base, mode=mode,
                     oracle_mode=cfg.oracle, gamma_fallback=cfg.gamma_fallback,
                     scan_points=cfg.scan_points,
                     with_damping=cfg.with_mech_damping, threads=cfg.threads)
    result = run_sweep(spec)
    from .recipes import sweep_rows
    rows = sweep_rows(result)
    names = tuple(ax.name for ax in cfg.axes)
    extra = {"sweep.mode": mode}
    for i, ax in enumerate(cfg.axes):
        extra[f"sweep.axis{i + 1}"] = f"{ax.name} {ax.lo} {ax.hi} {ax.points} {ax.scale}"
    return names, rows, extra, result.diagnostics


def run_command(cfg: RunConfig) -> int:
    """Execute a parsed RunConfig; returns the process exit status."""
    axis_names: tuple[str, ...] = ()
    extra: dict = {}
    if cfg.command == "roots":
        rows, extra, diags = _cmd_roots(cfg)
    elif cfg.command == "branches":
        rows, extra, diags = _cmd_branches(cfg)
    elif cfg.command == "cool":
        rows, extra, diags = _cmd_cool(cfg)
    elif cfg.command in ("sweep1d", "sweep2d"):
        ndim = 1 if cfg.command == "sweep1d" else 2
        axis_names, rows, extra, diags = _cmd_sweep(cfg, ndim)
    elif cfg.command == "reproduce":
        return _run_reproduce(cfg)
    else:
        raise ParseError(f"unknown command {cfg.command!r}")
    columns = axis_names + COLUMNS
    meta = _meta_for(cfg, extra)
    write_table(cfg.out_path, cfg.out_format, columns, rows, meta)
    if diags:
        _write_diagnostics(cfg.out_path, diags)
    if any(d.kind == "coefficient-mismatch" for d in diags):
        return 2
    return 0


def _run_reproduce(cfg: RunConfig) -> int:
    result: RecipeResult = run_recipe(
        cfg.recipe, points=cfg.points, threads=cfg.threads,
        scan_points=cfg.scan_points, oracle=cfg.oracle,
        gamma_fallback=cfg.gamma_fallback, convention=cfg.convention)
    columns = result.axis_names + COLUMNS
    meta = {"tool": "quadmech", "version": __version__,
            "command": f"reproduce {result.tag}",
            "flag.convention": cfg.convention,
            "flag.oracle": cfg.oracle, "flag.scan_points": cfg.scan_points}
    base = result.meta.get("base")
    if base is not None:
        for f in fields(base):
            meta[f"param.{f.name}"] = getattr(base, f.name)
    for key in ("mode", "convention", "case", "axes"):
        if key in result.meta:
            meta[f"recipe.{key}"] = str(result.meta[key])
    subtables = result.meta.get("subtables")
    if subtables:
        stem = Path(cfg.out_path)
        for name, rows in subtables.items():
            path = stem.with_name(f"{stem.stem}_{name}{stem.suffix}")
            write_table(str(path), cfg.out_format, columns, rows,
                        {**meta, "recipe.case": name})
            _write_plot_stub(str(path), f"{result.tag} ({name})", columns)
    else:
        write_table(cfg.out_path, cfg.out_format, columns, result.rows, meta)
        _write_plot_stub(cfg.out_path, result.tag, columns)
    if result.diagnostics:
        _write_diagnostics(cfg.out_path, result.diagnostics)
    if any(d.kind == "coefficient-mismatch" for d in result.diagnostics):
        return 2
    return 0


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quadmech",
        description="Steady-state multistability and quantum cooling of a "
                    "linear+quadratic two-mode optomechanical system")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--set", action="append", default=[], metavar="K=V",
                        help="override a config key (repeatable)")
    common.add_argument("--out", help="output file path")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--oracle", choices=("on", "off"))
    common.add_argument("--gamma-fallback", choices=("on", "off"))
    common.add_argument("--convention", choices=("kappa", "omega1"))
    common.add_argument("--scan-points", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--with-mech-damping", choices=("on", "off"))
    for name in ("roots", "branches", "cool", "sweep1d", "sweep2d"):
        sub.add_parser(name, parents=[common])
    rep = sub.add_parser("reproduce", parents=[common])
    rep.add_argument("tag", choices=sorted(RECIPES))
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text() if args.config else ""
        cfg = parse_config(text, args.set, command=args.command)
        if args.out:
            cfg.out_path = args.out
        if args.format:
            cfg.out_format = args.format
        if args.oracle:
            cfg.oracle = args.oracle == "on"
        if args.gamma_fallback:
            cfg.gamma_fallback = args.gamma_fallback == "on"
        if args.convention:
            cfg.convention = args.convention
        if args.scan_points:
            cfg.scan_points = args.scan_points
        if args.threads:
            cfg.threads = args.threads
        if args.with_mech_damping:
            cfg.with_mech_damping = args.with_mech_damping == "on"
        if args.command == "reproduce":
            cfg.recipe = args.tag
        return run_command(cfg)
    except (ParseError, ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
