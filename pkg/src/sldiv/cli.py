"""Command line entry point: ``sldiv [run|convergence|baseline|list] ...``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .cases import (CASES, CaseSpec, UnknownCaseError, compare_baseline, convergence_study,
                    run_case_full)
from .displacement import BracketError, DiffusivityDomainError
from .oracles import ConfigurationError
from .solver import ModelError, NumericalBlowup

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
INTERP = {"p1": 1, "cubic": 3}
SUBCOMMANDS = ("run", "convergence", "baseline", "list")

log = logging.getLogger("sldiv")


class UsageError(Exception):
    pass


def _common(parser):
    parser.add_argument("--config", help="JSON file with case, nodes, steps, interp, ...")
    parser.add_argument("--case")
    parser.add_argument("--nodes", type=int)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--interp", choices=sorted(INTERP))
    parser.add_argument("--displacement", choices=["fp", "bisect", "fallback"])
    parser.add_argument("--out", help="output directory (default: $OUT_DIR, else no files)")
    parser.add_argument("--ref-factor", type=int, dest="ref_factor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sldiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")
    _common(sub.add_parser("run", help="run one case and write its CSVs"))
    conv = sub.add_parser("convergence", help="observed order over a list of resolutions")
    _common(conv)
    conv.add_argument("--resolutions", required=True,
                      help="comma separated N:M pairs, e.g. 1600:50,1600:100,1600:200")
    conv.add_argument("--variable", choices=["time", "space"], default="time")
    conv.add_argument("--orders", default="cubic", help="comma separated p1/cubic")
    base = sub.add_parser("baseline", help="SL against the FD theta scheme")
    base.add_argument("--nodes", type=int, default=200)
    base.add_argument("--courant", default="1.375,2.75,5.5")
    base.add_argument("--interp", choices=sorted(INTERP), default="cubic")
    base.add_argument("--out")
    sub.add_parser("list", help="list registered cases")
    return parser


def _settings(args) -> dict:
    settings = {}
    if args.config:
        try:
            with open(args.config) as fh:
                settings = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(settings, dict):
            raise UsageError("config file must hold a JSON object")
    for key in ("case", "nodes", "steps", "interp", "displacement", "out", "ref_factor"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if "case" not in settings:
        raise UsageError("no case given (use --case or a config file)")
    return settings


def _spec(settings: dict, **overrides) -> CaseSpec:
    settings = {**settings, **overrides}
    interp = settings.get("interp", "cubic")
    if interp not in INTERP:
        raise UsageError(f"interp must be one of {sorted(INTERP)}")
    unknown = set(settings) - {"case", "nodes", "steps", "interp", "displacement", "out",
                                "ref_factor"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return CaseSpec(settings["case"], settings.get("nodes"), settings.get("steps"),
                    INTERP[interp], settings.get("displacement"),
                    settings.get("ref_factor", 4), settings.get("out"))


def _print_report(report):
    errors = ""
    if report.l2_rel is not None:
        errors = f"  l2_rel={report.l2_rel:.3e}  linf_rel={report.linf_rel:.3e}"
    print(f"{report.case}  N={report.N}  M={report.M}  C={report.C:.4g}  mu={report.mu:.4g}"
          f"{errors}  ({report.wall_time:.2f} s)")


def _run(args):
    result = run_case_full(_spec(_settings(args)))
    for report in result.reports:
        _print_report(report)
    for key, value in result.metrics.items():
        print(f"  {key}: {value}")


def _pairs(text):
    try:
        return [tuple(int(v) for v in item.split(":")) for item in text.split(",") if item]
    except ValueError as exc:
        raise UsageError(f"bad resolution list {text!r}") from exc


def _convergence(args):
    settings = _settings(args)
    orders = []
    for name in args.orders.split(","):
        if name not in INTERP:
            raise UsageError(f"unknown interpolation {name!r}")
        orders.append(INTERP[name])
    spec = _spec(settings)
    table = convergence_study(spec.name, _pairs(args.resolutions), orders, args.variable,
                              out_dir=spec.out_dir, displacement=spec.displacement,
                              ref_factor=spec.ref_factor)
    for row in table.rows:
        print(f"order={row[1]}  N={row[2]}  M={row[3]}  l2_rel={row[6]:.3e}")
    for order, rate in table.rates.items():
        print(f"order {order}: observed rate in {args.variable} = {rate:.3f}")


def _baseline(args):
    try:
        courants = tuple(float(c) for c in args.courant.split(","))
    except ValueError as exc:
        raise UsageError(f"bad Courant list {args.courant!r}") from exc
    rows = compare_baseline(args.nodes, courants, INTERP[args.interp], out_dir=args.out)
    for scheme, c, mu, l2, linf in rows:
        print(f"{scheme:9s} C={c:<6g} mu={mu:<8.4g} l2_rel={l2:.3e}  linf_rel={linf:.3e}")


def _list(args):
    for name, case in CASES.items():
        print(f"{name:16s} N={case.nodes:<4d} M={case.steps:<4d} {case.description}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS + ("-h", "--help"):
        argv.insert(0, "run")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handlers = {"run": _run, "convergence": _convergence, "baseline": _baseline, "list": _list}
    try:
        handlers[args.command](args)
    except (UsageError, UnknownCaseError, ConfigurationError, ValueError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalBlowup, ModelError, DiffusivityDomainError, BracketError,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
