"""Command-line entry point.

    qbsim run CONFIG [--set section.key=value ...] [--out PATH] [--format csv|json]
    qbsim validate CONFIG [--set ...]
    qbsim reproduce {fig2a,fig2b,fig3,fig5a,fig5b} [--out PATH]
    qbsim <scenario> [CONFIG] [--set ...]      # charge, age, ergotropy, ...
    qbsim defaults <scenario> [--figure FIG]

Exit status: 0 success, 2 invalid config, 3 a physical invariant broke at run time.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from .config import (
    FIGURES,
    SCHEMA,
    ScenarioConfig,
    apply_overrides,
    canonical_json,
    default_config,
    load_config_file,
    parse_config,
)
from .errors import BoundStateError, ConfigError, DipOutsideWindowError, InvariantViolation
from .scenarios import Table, preflight, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
MANIFEST_VERSION = 1


def fmt_number(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return f"{x:.16e}"


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([fmt_number(v) for v in row])
    return buf.getvalue()


def render_json(table: Table) -> str:
    records = [{c: float(fmt_number(v)) for c, v in zip(table.columns, row)} for row in table.rows]
    return json.dumps(records, indent=1) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def build_manifest(cfg: ScenarioConfig, table: Table, data: str, notes: list[str]) -> dict:
    return {
        "manifest_version": MANIFEST_VERSION,
        "qbsim_version": __version__,
        "scenario": cfg.scenario,
        "figure": cfg.figure,
        "config": cfg.raw,
        "config_sha256": hashlib.sha256(canonical_json(cfg.raw).encode()).hexdigest(),
        "resolved_parameters": _jsonable(cfg.resolved()),
        "numerics": _jsonable(cfg.numerics),
        "output": {
            "path": cfg.output_path,
            "format": cfg.output_format,
            "columns": table.columns,
            "rows": len(table.rows),
            "sha256": hashlib.sha256(data.encode()).hexdigest(),
        },
        "summary": _jsonable(table.summary),
        "diagnostics": list(dict.fromkeys(notes + table.diagnostics)),
    }


def execute(raw: dict, out: str | None = None, fmt: str | None = None, stream=None) -> int:
    """Validate, run and write a scenario. Returns the process exit code."""
    stream = stream or sys.stdout
    raw = dict(raw)
    if out or fmt:
        raw["output"] = dict(raw.get("output", {}))
        if out:
            raw["output"]["path"] = out
        if fmt:
            raw["output"]["format"] = fmt
    try:
        cfg = parse_config(raw)
        notes = preflight(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = run_scenario(cfg)
        notes += [str(w.message) for w in caught]
    except (InvariantViolation, BoundStateError, DipOutsideWindowError) as exc:
        print(f"runtime invariant violated: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    data = render_csv(table) if cfg.output_format == "csv" else render_json(table)
    path = Path(cfg.output_path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(data, encoding="utf-8", newline="")
    manifest = build_manifest(cfg, table, data, notes)
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(table.rows)} rows) and {manifest_path}", file=stream)
    for note in manifest["diagnostics"]:
        print(f"warning: {note}", file=stream)
    return EXIT_OK


def validate(raw: dict) -> dict:
    report = {"ok": True, "errors": [], "warnings": []}
    try:
        cfg = parse_config(raw)
    except ConfigError as exc:
        report["ok"] = False
        report["errors"] = str(exc).split("; ")
        return report
    try:
        report["warnings"] = preflight(cfg)
    except ValueError as exc:
        report["ok"] = False
        report["errors"].append(str(exc))
    report["resolved_parameters"] = _jsonable(cfg.resolved())
    return report


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. parameters.beta_mag=0.5")
    p.add_argument("--out", help="output data path (manifest goes next to it)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbsim", description="Switchable coherent-state quantum battery simulator")
    parser.add_argument("--version", action="version", version=f"qbsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the scenario described by a config or manifest file")
    p.add_argument("config")
    _add_common(p)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    p = sub.add_parser("reproduce", help="regenerate the data behind a figure")
    p.add_argument("figure", choices=FIGURES)
    _add_common(p)

    p = sub.add_parser("defaults", help="print the default config of a scenario")
    p.add_argument("scenario", choices=sorted(SCHEMA) + ["reproduce"])
    p.add_argument("--figure", choices=FIGURES)

    for name in SCHEMA:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("config", nargs="?", help="optional config; defaults fill anything missing")
        _add_common(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "defaults":
            print(json.dumps(default_config(args.scenario, args.figure), indent=2))
            return EXIT_OK
        if args.command == "reproduce":
            raw = default_config("reproduce", args.figure)
        elif args.command in ("run", "validate"):
            raw = load_config_file(args.config)
        else:
            raw = load_config_file(args.config) if args.config else default_config(args.command)
            if raw.get("scenario", args.command) != args.command:
                raise ConfigError(f"config scenario {raw.get('scenario')!r} does not match command {args.command!r}")
            raw.setdefault("scenario", args.command)
        raw = apply_overrides(raw, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        report = validate(raw)
        print(json.dumps(report, indent=2))
        return EXIT_OK if report["ok"] else EXIT_CONFIG
    return execute(raw, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
