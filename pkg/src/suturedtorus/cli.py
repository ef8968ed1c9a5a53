"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 oracle or count mismatch,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys

import jsonschema

from . import config as cfg
from .errors import ConfigError, OracleMismatch, OrbitCountMismatch
from .homology import DEFAULT_HMAX, THEORIES, check_against_closed_form, rank_table
from .model import Tolerances
from .orbits import build_orbits, catalog_table
from .plotting import PLOT_KINDS
from .reports import _plain, dumps
from .verify import SUITES, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH, EXIT_VERIFY = 0, 1, 2, 3

OUTPUT_SCHEMAS = {
    "ranks": {
        "type": "object",
        "required": ["theory", "n", "h_max", "ranks", "oracle_match"],
        "properties": {"ranks": {"type": "array", "items": {
            "type": "object", "required": ["h", "rank"],
            "properties": {"h": {"type": "integer"}, "rank": {"type": "integer", "minimum": 0}}}}},
    },
    "verify": {
        "type": "object",
        "required": ["suite", "model", "passed", "checks"],
        "properties": {"checks": {"type": "array", "items": {
            "type": "object", "required": ["name", "passed", "max_defect", "tolerance"]}}},
    },
    "orbits": {
        "type": "object",
        "required": ["n", "orbits", "iterates"],
        "properties": {"orbits": {"type": "array"}, "iterates": {"type": "array"}},
    },
}


def _tol_flag(name):
    return "--tol-" + name.replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="suturedtorus",
        description="Sutured contact solid torus: dynamics, gluing data and homology ranks.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--n", type=int, help="number of prongs (2n sutures)")
    common.add_argument("--eps", type=float, help="contact smallness parameter")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="seed for sample jitter")
    for f in dataclasses.fields(Tolerances):
        common.add_argument(_tol_flag(f.name), dest=f"tol_{f.name}", type=type(f.default),
                            metavar=f.name.upper(), help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ranks", parents=[common], help="homology rank table")
    p.add_argument("--theory", choices=THEORIES)
    p.add_argument("--hmax", type=int)

    p = sub.add_parser("verify", parents=[common], help="numeric verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",))

    p = sub.add_parser("orbits", parents=[common], help="orbit catalog")
    p.add_argument("--smax", type=int)

    p = sub.add_parser("plot", parents=[common], help="SVG figures")
    p.add_argument("--what")
    return parser


def resolve(args) -> dict:
    """Configuration file overlaid with command-line flags, then defaults."""
    raw = cfg.load_config(args.config) if args.config else {}
    raw = dict(raw)
    raw["command"] = args.command
    model = dict(raw.get("model", {}))
    if args.n is not None:
        model["n"] = args.n
    if args.eps is not None:
        model["eps"] = args.eps
    tols = dict(model.get("tolerances", {}))
    for f in dataclasses.fields(Tolerances):
        value = getattr(args, f"tol_{f.name}")
        if value is not None:
            tols[f.name] = value
    if tols:
        model["tolerances"] = tols
    if model:
        raw["model"] = model
    for key in ("theory", "hmax", "smax", "suite", "what", "format", "out", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    return cfg.merged(raw)


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _emit(kind, payload, conf):
    jsonschema.validate(_plain(payload), OUTPUT_SCHEMAS[kind])
    _write(dumps(payload), conf["out"])


def cmd_ranks(conf):
    theory = conf.get("theory", "ech")
    n = conf["model"]["n"]
    h_max = conf["hmax"]
    if h_max is None:
        h_max = n - 1 if theory == "ech" else DEFAULT_HMAX
    kwargs = {"enumeration_limit": conf["enumeration_limit"]} if theory == "ch" else {}
    try:
        table = rank_table(theory, n, h_max, **kwargs)
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    mismatches = check_against_closed_form(table)
    if conf["format"] == "csv":
        _write(table.to_csv(), conf["out"])
    else:
        payload = table.to_dict()
        payload["oracle_match"] = not mismatches
        _emit("ranks", payload, conf)
    if mismatches:
        print(f"closed-form mismatch at classes {[h for h, _, _ in mismatches]}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_verify(conf):
    model = cfg.make_model(conf["model"])
    suite = conf.get("suite", "all")
    reports = run_suite(suite, model, conf["samples"], conf["seed"])
    passed = all(r.passed for r in reports)
    payload = {
        "suite": suite,
        "model": model.to_dict(),
        "passed": passed,
        "checks": [r.to_dict() for r in reports],
    }
    _emit("verify", payload, conf)
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_orbits(conf):
    model = cfg.make_model(conf["model"])
    try:
        orbits = build_orbits(model)
    except OrbitCountMismatch as exc:
        print(f"orbit count mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    rows = catalog_table(orbits, conf["smax"])
    if conf["format"] == "csv":
        buf = io.StringIO()
        cols = ["label", "type", "multiplicity", "action", "homology_class", "cz_index", "is_good"]
        writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        _write(buf.getvalue(), conf["out"])
    else:
        payload = {
            "n": model.n,
            "model": model.to_dict(),
            "orbits": [o.to_dict() for o in orbits],
            "iterates": rows,
        }
        _emit("orbits", payload, conf)
    return EXIT_OK


def cmd_plot(conf):
    from .gluing import construct_gluing_data
    from .plotting import gluing_svg, levelsets_svg

    what = conf.get("what", "levelsets")
    if what not in PLOT_KINDS:
        print(f"unknown plot kind {what!r}; choose from {', '.join(PLOT_KINDS)}", file=sys.stderr)
        return EXIT_CONFIG
    model = cfg.make_model(conf["model"])
    svg = levelsets_svg(model) if what == "levelsets" else gluing_svg(construct_gluing_data(model))
    _write(svg, conf["out"])
    return EXIT_OK


COMMANDS = {"ranks": cmd_ranks, "verify": cmd_verify, "orbits": cmd_orbits, "plot": cmd_plot}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        conf = resolve(args)
        return COMMANDS[args.command](conf)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
