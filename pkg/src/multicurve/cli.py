"""Command-line entry point.

Exit status is 0 on success, 2 for configuration problems (bad files, missing
quotes, wiring errors) and 3 for numerical failures (bootstrap, stripping or
calibration).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import warnings

from . import harness
from .errors import ConfigurationError, NumericalError
from .pricing import (CapFloorSpec, Methodology, black_cap_floor, cap_schedule, fra_value,
                      make_swap, par_rate, swap_npv)
from .curve import fra_rate
from .synthetic import synthetic_snapshot
from .temporal import add_tenor
from .volstrip import ForwardVolSurface, atm_rate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _load_json(path, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read {what} {path}: {exc}") from exc


def _config(args) -> dict:
    return _load_json(args.config, "config") if args.config else {}


def _snapshot(args) -> harness.MarketSnapshot:
    if not args.snapshot:
        raise ConfigurationError("--snapshot is required")
    return harness.MarketSnapshot.load(args.snapshot)


def _methodologies(args, config) -> list[str]:
    methods = args.methods or config.get("methodologies") or list(harness.METHODOLOGIES)
    return [Methodology(m).value for m in methods]


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _emit_table(out_dir, stem, fieldnames, rows, fmt) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{stem}.{fmt}")
    text = (harness.csv_text(fieldnames, rows) if fmt == "csv"
            else harness.json_text([{k: r.get(k) for k in fieldnames} for r in rows]))
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return [path]


def cmd_generate(args, config) -> list[str]:
    snap = synthetic_snapshot(args.seed)
    path = args.snapshot or os.path.join(args.out, "snapshot.json")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    snap.save(path)
    return [path]


def cmd_bootstrap(args, config) -> list[str]:
    snap = _snapshot(args)
    curves = harness.run_curve_build(snap, args.curves or config.get("curves"))
    out_dir = os.path.join(args.out, "curves")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name in curves.names:
        path = os.path.join(out_dir, f"{_slug(name)}.json")
        with open(path, "w") as fh:
            fh.write(harness.json_text({"name": name, **curves[name].to_dict()}))
        paths.append(path)
    fields = ("curve", "instrument", "pillar", "df", "quote", "model", "error")
    return paths + _emit_table(args.out, "bootstrap_diagnostics", fields, curves.diagnostics(), args.format)


def _price_rows(snap, curves, methods, instruments) -> list[dict]:
    rows = []
    spot = snap.spot
    for inst in instruments:
        kind = inst.get("type", "").lower()
        for m in methods:
            ctx = curves.context(m)
            notional = float(inst.get("notional", 1.0))
            if kind == "swap":
                start = add_tenor(spot, inst.get("start", "0D"))
                swap = make_swap(start, add_tenor(start, inst["tenor"]), float(inst.get("fixedRate", 0.0)),
                                 notional=notional, omega=int(inst.get("omega", 1)))
                npv, rate = swap_npv(ctx, swap), par_rate(ctx, swap)
            elif kind == "fra":
                t1, t2 = add_tenor(spot, inst["start"]), add_tenor(spot, inst["end"])
                npv = fra_value(ctx, t1, t2, float(inst["strike"]), int(inst.get("omega", 1)), notional)
                rate = fra_rate(ctx.forward, t1, t2)
            elif kind in ("cap", "floor"):
                schedule = cap_schedule(spot, add_tenor(spot, inst["maturity"]))
                spec = CapFloorSpec(schedule, float(inst["strike"]), 1 if kind == "cap" else -1,
                                    float(inst["vol"]), notional)
                npv, rate = black_cap_floor(ctx, spec), atm_rate(ctx, schedule)
            else:
                raise ConfigurationError(f"unknown instrument type {inst.get('type')!r}")
            rows.append({"id": inst.get("id", kind), "method": m, "npv": npv, "parRate": rate})
    return rows


def cmd_price(args, config) -> list[str]:
    snap = _snapshot(args)
    instruments = _load_json(args.instruments, "instruments") if args.instruments else config.get("instruments")
    if not instruments:
        raise ConfigurationError("no instruments given (--instruments or config 'instruments')")
    methods = _methodologies(args, config)
    curves = harness.run_curve_build(snap, harness.curves_for(methods))
    rows = _price_rows(snap, curves, methods, instruments)
    return _emit_table(args.out, "prices", ("id", "method", "npv", "parRate"), rows, args.format)


def cmd_strip(args, config) -> list[str]:
    snap = _snapshot(args)
    curves = harness.run_curve_build(snap, harness.curves_for(["multi-nocsa", "multi-csa"]))
    surfaces = harness.run_strip(snap, curves)
    os.makedirs(args.out, exist_ok=True)
    paths = []
    for ctx, surface in surfaces.items():
        path = os.path.join(args.out, f"surface_{ctx}.json")
        with open(path, "w") as fh:
            fh.write(harness.json_text(surface.to_dict()))
        paths.append(path)
    return paths


OBJECTIVES = {"standard": "standard", "std": "standard", "vegaWeighted": "vegaWeighted", "vega": "vegaWeighted"}


def cmd_calibrate(args, config) -> list[str]:
    snap = _snapshot(args)
    cal_cfg = config.get("calibration", {})
    surfaces = None
    if args.surface:
        surface = ForwardVolSurface.from_dict(_load_json(args.surface, "surface"))
        surfaces = {surface.context: surface}
    context = args.context or (surface.context if surfaces else cal_cfg.get("context", "eonia"))
    if surfaces and context not in surfaces:
        raise ConfigurationError(f"surface file holds {surface.context} vols, not {context}")
    objective = OBJECTIVES.get(args.objective or cal_cfg.get("objective", "standard"))
    if objective is None:
        raise ConfigurationError(f"unknown objective {args.objective or cal_cfg.get('objective')!r}")
    beta = args.beta if args.beta is not None else float(cal_cfg.get("beta", 0.5))
    curves = harness.run_curve_build(snap, harness.curves_for(["multi-nocsa", "multi-csa"]))
    calibration = harness.run_calibration(snap, curves, context, objective, beta, surfaces)
    stem = f"calibration_{context}_{objective}"
    paths = _emit_table(args.out, stem, harness.CALIBRATION_FIELDS,
                        harness.calibration_rows(calibration), args.format)
    summary = {**calibration.summary(), "context": context, "beta": beta,
               "errors": [f"{s.tag}: {e}" for s, e in calibration.errors]}
    path = os.path.join(args.out, f"{stem}_summary.json")
    with open(path, "w") as fh:
        fh.write(harness.json_text(summary))
    if not calibration.reports and calibration.errors:
        raise calibration.errors[0][1]
    return paths + [path]


def cmd_compare_fsirs(args, config) -> list[str]:
    snap = _snapshot(args)
    methods = _methodologies(args, config)
    curves = harness.run_curve_build(snap, harness.curves_for(methods))
    exclude = float(config.get("fsirs", {}).get("excludeMaxYears", 2.0))
    report = harness.run_fsirs_comparison(snap, curves, methods, exclude)
    return harness.emit_report(report, args.out, args.format)


def _parse_pairing(items) -> dict:
    out = {}
    for item in items or ():
        method, sep, ctx = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--pairing expects METHOD=CONTEXT, got {item!r}")
        out[method] = ctx
    return out


def cmd_compare_capfloor(args, config) -> list[str]:
    snap = _snapshot(args)
    methods = _methodologies(args, config)
    cf = config.get("capFloor", {})
    pairing = {**cf.get("pairing", {}), **_parse_pairing(args.pairing)}
    allow = args.allow_mispairing or bool(cf.get("allowMispairing", False))
    curves = harness.run_curve_build(snap, harness.curves_for(methods))
    report = harness.run_capfloor_comparison(snap, curves, methods, pairing, allow)
    return harness.emit_report(report, args.out, args.format)


COMMANDS = {
    "generate": (cmd_generate, "write a synthetic self-consistent market snapshot"),
    "bootstrap": (cmd_bootstrap, "build the named curves and per-pillar diagnostics"),
    "price": (cmd_price, "price instruments under each methodology"),
    "strip": (cmd_strip, "strip Euribor- and Eonia-consistent caplet vol surfaces"),
    "calibrate": (cmd_calibrate, "calibrate SABR per smile section of a stripped surface"),
    "compare-fsirs": (cmd_compare_fsirs, "forward-start swap model vs market differences"),
    "compare-capfloor": (cmd_compare_capfloor, "cap/floor model vs market premium differences"),
}


def _add_common(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--snapshot", default=d(None), help="market snapshot JSON")
    parser.add_argument("--config", default=d(None), help="run configuration JSON")
    parser.add_argument("--out", default=d("out"), help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=d("csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multicurve", description=__doc__.splitlines()[0])
    _add_common(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text)
               for name, (_, text) in COMMANDS.items()}
    parsers["generate"].add_argument("--seed", type=int, default=0)
    parsers["bootstrap"].add_argument("--curves", nargs="+", metavar="NAME",
                                      help=f"subset of {', '.join(harness.CURVE_NAMES)}")
    for name in ("price", "compare-fsirs", "compare-capfloor"):
        parsers[name].add_argument("--methods", nargs="+", choices=harness.METHODOLOGIES)
    parsers["price"].add_argument("--instruments", help="instrument list JSON")
    parsers["calibrate"].add_argument("--context", choices=harness.VOL_CONTEXTS)
    parsers["calibrate"].add_argument("--surface", help="stripped surface JSON (default: strip the snapshot)")
    parsers["calibrate"].add_argument("--objective", choices=tuple(OBJECTIVES))
    parsers["calibrate"].add_argument("--beta", type=float)
    parsers["compare-capfloor"].add_argument("--pairing", nargs="+", metavar="METHOD=CONTEXT")
    parsers["compare-capfloor"].add_argument("--allow-mispairing", action="store_true",
                                             help="price with mispaired vols and flag the rows")
    return parser


def _format_warning(message, category, filename, lineno, line=None) -> str:
    return f"warning: {message}\n"


def main(argv=None) -> int:
    warnings.formatwarning = _format_warning
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        paths = handler(args, _config(args))
    except (ConfigurationError, OSError, KeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
