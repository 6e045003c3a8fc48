"""Command-line entry point: ``gbs-certify <stage> --config experiment.yaml``."""

import argparse
import json
import sys

from . import logsetup
from .constants import STAGES
from .handler import handler


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbs-certify",
        description="Simulate photon-counting experiments and certify them with orbit-probability kernels.",
    )
    subparsers = parser.add_subparsers(dest="stage", required=True, metavar="STAGE")

    helps = {
        "generate": "draw circuits and write one bundle per (kind, sector, replicate)",
        "sample": "draw photon-count samples for every sampled bundle",
        "estimate": "estimate orbit probabilities and assemble feature vectors",
        "kernels": "compute kernel statistics and separations",
        "classify": "train and evaluate the classifier",
        "report": "write the report series",
        "all": "run every stage in order",
    }
    for stage in STAGES + ["all"]:
        sub = subparsers.add_parser(stage, help=helps[stage])
        sub.add_argument("--config", required=True, help="experiment config file (.yaml, .yml or .json)")
        sub.add_argument("--out-dir", default=None, help="output directory (overrides the config)")
        sub.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
        sub.add_argument("--stage-seed-offset", type=int, default=None, help="offset mixed into every stage seed")
        sub.add_argument("--log-level", default=None, help="log level (default: LOG_LEVEL or INFO)")
        sub.add_argument("--json-logs", action="store_true", help="render log events as JSON lines")
    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Run a stage from the command line and print the response record.

    :returns: ``0`` on success, ``1`` on failure
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    logsetup.setup(level=args.log_level, json_logs=args.json_logs)

    event = {
        "Stage": args.stage,
        "ConfigPath": args.config,
        "OutputDir": args.out_dir,
        "Seed": args.seed,
        "StageSeedOffset": args.stage_seed_offset,
        "LogLevel": args.log_level,
    }
    result = handler(event, None, json_logs=args.json_logs)
    response = result["Response"]

    if "ErrorDetails" in response:
        print(json.dumps(response, indent=2, sort_keys=True, default=str), file=sys.stderr)
        return 1

    print(json.dumps(response, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
