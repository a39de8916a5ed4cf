"""Command line entry point.

    psvgd run --config exp.yaml [--seed S] [--workers K] [--out DIR]
    psvgd compare --out DIR RUN_DIR [RUN_DIR ...]

The output directory of ``run`` falls back to ``$PSVGD_OUTPUT_DIR`` and
then to ``output_dir`` in the config.  Exit codes: 0 success,
1 configuration error, 2 numerical failure.
"""

import argparse
import logging
import os
import sys

from psvgd.errors import ConfigurationError, DomainError, NumericalError
from psvgd.harness import io
from psvgd.harness.config import load_config
from psvgd.harness.metrics import compare_runs
from psvgd.harness.runner import OUTPUT_ENV, load_summary, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

COMPARISON_FILE = "comparison.csv"


def build_parser():
    parser = argparse.ArgumentParser(prog="psvgd", description="SVGD and projected SVGD experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a YAML config")
    run.add_argument("--config", required=True, help="path to the experiment YAML")
    run.add_argument("--seed", type=int, help="override the particle seed")
    run.add_argument("--workers", type=int, help="override the worker count")
    run.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV}, then the config)")

    compare = sub.add_parser("compare", help="tabulate finished runs")
    compare.add_argument("--out", required=True, help="directory for comparison.csv")
    compare.add_argument("runs", nargs="+", help="run output directories")
    return parser


def _run(args):
    config = load_config(args.config).replace(seed=args.seed, workers=args.workers)
    result = run_experiment(config, args.out)
    if not result.out_dir:
        print("warning: no output directory given; nothing written", file=sys.stderr)
    for name, value in sorted(result.metrics.items()):
        print(f"{name}: {value}")
    return EXIT_OK


def _compare(args):
    for run_dir in args.runs:
        if not os.path.isfile(os.path.join(run_dir, io.METRICS_FILE)):
            raise ConfigurationError(f"{run_dir} is not a finished run directory")
    header, rows = compare_runs(load_summary(d) for d in args.runs)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, COMPARISON_FILE)
    io.write_rows(path, header, rows)
    print(",".join(header))
    for row in rows:
        print(",".join(io._fmt(v) for v in row))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _run(args)
        return _compare(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
