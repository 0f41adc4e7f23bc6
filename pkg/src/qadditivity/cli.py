"""Command-line entry point: ``qadditivity {run,scan,presets}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__, scenario
from .errors import ConfigError, NumericalFailure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("qadditivity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qadditivity",
        description="Effective-Hamiltonian thermodynamics of two coupled quantum systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb, text in (
        ("run", "thermo trace, figure data and additivity report"),
        ("scan", "peak effective energies along a population scan"),
    ):
        p = sub.add_parser(verb, help=text)
        p.add_argument("config", help="YAML scenario file")
        p.add_argument("-o", "--out", help="output directory (overrides output.dir)")

    presets = sub.add_parser("presets", help="built-in illustrative scenarios")
    psub = presets.add_subparsers(dest="action", required=True)
    psub.add_parser("list", help="list preset names")
    emit = psub.add_parser("emit", help="print a preset config to stdout")
    emit.add_argument("name")
    return parser


def _report(manifest, out) -> None:
    for name, digest in manifest.outputs.items():
        print(f"{out}/{name}  sha256={digest[:16]}")
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )

    if args.verb == "presets":
        if args.action == "list":
            for name, (desc, _) in scenario.PRESETS.items():
                print(f"{name:18s} {desc}")
            return EXIT_OK
        try:
            sys.stdout.write(scenario.preset_text(args.name))
        except KeyError:
            print(f"error: unknown preset {args.name!r}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        cfg = scenario.load_config(args.config)
        out = args.out or cfg.output_dir
        log.info("scenario %s -> %s", cfg.name, out)
        manifest = scenario.run(cfg, out) if args.verb == "run" else scenario.scan(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _report(manifest, out)
    return EXIT_OK
