"""Command-line entry point.

Exit codes: 0 on success, 1 on config validation failure, 2 on runtime
failure. The master seed resolves as --seed, then the TSXFIDEL_SEED
environment variable, then the config file, then 0.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import yaml

from tsxfidel.errors import ConfigValidationError, TsxfidelError
from tsxfidel.harness import emit, run, validate_config

SEED_ENV_VAR = "TSXFIDEL_SEED"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsxfidel",
        description="Evaluate the local fidelity of forecast explanations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run the configured experiment sweep")
    run_parser.add_argument("--config", required=True, help="experiment config file (YAML)")
    run_parser.add_argument("--out", default="out", help="output directory (default: out)")
    run_parser.add_argument("--seed", type=int, default=None, help="master seed override")
    run_parser.add_argument("--jobs", type=int, default=1, help="window-level worker count")
    run_parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    validate_parser = sub.add_parser("validate", help="check a config file and show the resolved values")
    validate_parser.add_argument("--config", required=True, help="experiment config file (YAML)")
    return parser


def _load_raw_config(path: str) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return raw if raw is not None else {}


def _resolve_seed(raw: dict, cli_seed: int | None) -> None:
    if cli_seed is not None:
        raw["seed"] = cli_seed
    elif SEED_ENV_VAR in os.environ:
        raw["seed"] = int(os.environ[SEED_ENV_VAR])


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = _load_raw_config(args.config)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error reading config: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        try:
            config = validate_config(raw)
        except ConfigValidationError as exc:
            print(str(exc), file=sys.stderr)
            return 1
        print(f"config ok; defaults applied for: {config.defaults_applied or 'none'}")
        return 0

    _resolve_seed(raw, args.seed)
    try:
        config = validate_config(raw)
    except ConfigValidationError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        report = run(config, jobs=args.jobs)
        written = emit(report, args.out)
    except TsxfidelError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
