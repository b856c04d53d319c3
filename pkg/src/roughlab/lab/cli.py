"""``roughlab`` command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (the
message names the failing module), 1 when stdout is closed early.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace

from ..errors import ConfigError, NumericalError
from . import config as cfgmod
from .experiments import COLUMNS, RUNNERS
from .io import TableWriter

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PIPE = 1

_DESCRIPTION = {
    "lift": "Hölder norms of the lifted driver, one row per trial",
    "integrate": "rough integral of F(X) against Z over [0, T]",
    "solve": "terminal value of dY = F(Y) dZ",
    "rates": "mesh convergence table with median slope summary rows",
    "contraction": "per-window Picard records of the stitched solve",
    "stability": "universal-limit distances between reference and approximant solves",
}


def _columns_help():
    return "\n".join(f"  {k:<12} {','.join(v)}" for k, v in COLUMNS.items())


def build_parser():
    epilog = cfgmod.SCHEMA_HELP + "\noutput columns:\n" + _columns_help() + (
        "\n\nexit codes: 0 ok, 1 output pipe closed, 2 config error, 3 numerical failure\n"
        "ROUGHLAB_THREADS caps the trial worker pool (default 1)\n")
    parser = argparse.ArgumentParser(
        prog="roughlab", description="Level-2 rough path experiments.", epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in RUNNERS:
        p = sub.add_parser(name, help=_DESCRIPTION[name], description=_DESCRIPTION[name],
                           epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="JSON experiment config (schema 1)")
        p.add_argument("--out", help="output path (overrides output.path; '-' for stdout)")
        p.add_argument("--seed", help="master seed override, unsigned 64-bit")
        p.add_argument("--format", choices=("csv", "json"), help="output format override")
    return parser


def _report(meta):
    for key, value in meta.items():
        print(f"{key}: {value}", file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config)
        cfg = cfg.with_overrides(seed=args.seed, fmt=args.format)
        if args.out is not None:
            cfg = replace(cfg, output_path=None if args.out == "-" else args.out)
        runner = RUNNERS[args.command]
        with TableWriter(cfg.output_path, COLUMNS[args.command], cfg.output_format) as table:
            _, _, meta = runner(cfg, table.write)
            table.meta.update(meta)
    except ConfigError as exc:
        print(f"roughlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"roughlab: numerical failure in module '{exc.module}': {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the final flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_PIPE
    _report(meta)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
