"""``contracta <command> --config <file> [--out <file>] [--format json|csv]``.

Exit codes: 0 success, 1 an expected certification failed (classify),
2 usage or configuration error, 3 evaluation or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import COMMANDS, ConfigError, load_config, parse_config
from .errors import ArgumentError, ContractaError
from .report import emit_report
from .runner import run

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE, EXIT_EVAL = 0, 1, 2, 3
SEED_ENV = "CONTRACTA_SEED"

log = logging.getLogger("contracta")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contracta",
                                description="Sample-based checks of contraction classes on b-metric spaces.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="YAML run configuration (optional for 'corpus')")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), help="report format (overrides output.format)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


class _UsageExit(Exception):
    pass


def _load(args):
    if args.config is None:
        if args.command != "corpus":
            raise _UsageExit(f"--config is required for '{args.command}'")
        cfg = parse_config("command: corpus\n")
    else:
        cfg = load_config(args.config)
    changes = {"command": args.command}
    seed = os.environ.get(SEED_ENV)
    if seed is not None and seed != "":
        try:
            changes["sampler__seed"] = int(seed)
        except ValueError:
            raise _UsageExit(f"{SEED_ENV} must be an integer, got {seed!r}") from None
    if args.format:
        changes["output__format"] = args.format
    if args.out:
        changes["output__path"] = args.out
    return cfg.replace(**changes)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _load(args)
    except _UsageExit as exc:
        print(f"contracta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"contracta: config error {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"contracta: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = run(cfg, args.command)
    except ArgumentError as exc:
        print(f"contracta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContractaError as exc:
        print(f"contracta: evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL

    try:
        text = emit_report(result, cfg["output.format"], cfg["output.path"])
    except OSError as exc:
        print(f"contracta: cannot write report: {exc}", file=sys.stderr)
        return EXIT_EVAL
    if cfg["output.path"] is None:
        sys.stdout.write(text)
    else:
        log.info("report written to %s", cfg["output.path"])

    if args.command == "classify" and not result["expected_certifications_hold"]:
        failed = [k for k, v in result["expected"].items() if not v["match"]]
        print(f"contracta: expected statuses not reproduced: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FALSIFIED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
