"""Command line driver: convert, validate, check, enrich, minimise, export.

Exit codes: 0 success, 1 usage error, 2 input or validation error,
3 internal error. Diagnostics go to stderr; data only to named files.
"""

import argparse
import logging
import sys

from polycheck import PolyCheck
from polycheck.errors import PolyCheckError
from polycheck.lang import parse_script
from polycheck.lts import export_lts
from polycheck.minimiser import write_partition
from polycheck.model import model_digest
from polycheck.utils import LOG_FORMAT, load_config, read_bytes, write_bytes

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _workers(value):
    if value == "auto":
        return value
    try:
        count = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got '{value}'") from None
    if count < 1:
        raise argparse.ArgumentTypeError("worker count must be at least 1")
    return count


def build_parser():
    parser = ArgumentParser(prog="pipeline.py", description="Polyhedral model checking pipeline")
    parser.add_argument("--config", default="config/config.yaml", help="YAML configuration file")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("convert", help="Wavefront .obj (+ .mtl) to model JSON")
    p.add_argument("--obj", required=True)
    p.add_argument("--mtl")
    p.add_argument("--rules", help="atom mapping rules (YAML or JSON)")
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=float, help="coordinate multiplier")

    p = sub.add_parser("validate", help="check the simplicial complex conditions")
    p.add_argument("--model", required=True)
    p.add_argument("--geometric", action="store_true", help="also check affine independence")

    p = sub.add_parser("check", help="check every save entry of a query script")
    p.add_argument("--model", help="overrides the script's load statement")
    p.add_argument("--script", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=_workers)
    p.add_argument("--no-prelude", action="store_true")
    p.add_argument("--timings", action="store_true", help="report parse/load/check times")
    p.set_defaults(parser=p)

    p = sub.add_parser("enrich", help="inject results into the model as atoms")
    p.add_argument("--model", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--inject", action="append", required=True, metavar="RESULT=ATOM")
    p.add_argument("--mode", choices=["replace", "append"], default="replace")
    p.add_argument("--out", required=True)

    p = sub.add_parser("minimise", help="quotient modulo logical equivalence")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=["gamma", "eta"], default="gamma")
    p.add_argument("--export", choices=["dot", "aut"], default="aut")
    p.add_argument("--out", required=True)
    p.add_argument("--partition-out", help="write the partition as a result file")
    p.add_argument("--oracle", action="store_true", help="use the exhaustive reference engine")
    p.add_argument("--block-cap", type=int)

    p = sub.add_parser("export", help="coloured .obj/.mtl of results")
    p.add_argument("--model", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--colormap")
    p.add_argument("--out", required=True)
    return parser


def _convert(app, args):
    model = app.convert(args.obj, args.out, args.rules, args.mtl, args.scale)
    logging.info(f"Wrote {model.cell_count} cells to {args.out}")


def _validate(app, args):
    report = app.validate(args.model, geometric=args.geometric)
    if not report.ok:
        logging.error(f"{args.model}: {len(report.violations)} violation(s)")
        return EXIT_INPUT
    logging.info(f"{args.model}: valid simplicial complex")
    return EXIT_OK


def _check(app, args):
    script = parse_script(read_bytes(args.script).decode("utf-8"), source=args.script)
    if args.model is None and script.model_path is None:
        args.parser.error(f"{args.script} has no load statement; pass --model")
    report = app.check(args.script, args.out, args.model, args.workers,
                       False if args.no_prelude else None, script=script)
    if args.timings:
        t = report.timings
        print(f"parse {t['parse']:.1f} ms, load {t['load']:.1f} ms, check {t['check']:.1f} ms",
              file=sys.stderr)


def _enrich(app, args):
    app.enrich(args.model, args.results, args.inject, args.out, args.mode)


def _minimise(app, args):
    model, _, partition, lts = app.minimise(args.model, args.mode, args.oracle, args.block_cap)
    write_bytes(args.out, export_lts(lts, args.export))
    if args.partition_out:
        write_bytes(args.partition_out, write_partition(partition, model_digest(model)))


def _export(app, args):
    app.export(args.model, args.results, args.out, args.colormap)


COMMANDS = {
    "convert": _convert, "validate": _validate, "check": _check,
    "enrich": _enrich, "minimise": _minimise, "export": _export,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=args.log_level or "INFO", format=LOG_FORMAT, stream=sys.stderr, force=True)
    try:
        config = load_config(args.config)
        if args.log_level is None:
            logging.getLogger().setLevel(str(config["logging"]["level"]).upper())
        status = COMMANDS[args.command](PolyCheck(config), args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (PolyCheckError, OSError) as e:
        logging.error(f"{args.command} failed: {e}")
        return EXIT_INPUT
    except Exception:
        logging.exception(f"{args.command} failed with an internal error")
        return EXIT_INTERNAL
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(run())
