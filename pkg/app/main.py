"""
Main entry point for the frame interpolator command line.

Every command receives the fully resolved RunConfig; application errors map
to their exit codes (2 bad input, 3 bad checkpoint, 4 bad config).
"""

import argparse
import sys
from typing import Optional, Sequence

from commands import COMMANDS
from config import get_settings
from schemas.run_config import load_run_config
from utils import AppException, configure_logging, get_logger
from utils.constants import EXIT_FAILURE

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="texmap",
        description=f"{settings.app_name} {settings.app_version}",
    )
    parser.add_argument("--config", help="Flat 'key = value' config file")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="overrides",
        help="Config override, repeatable (e.g. --set upsampler.backend=afu)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    configure_logging(debug=settings.debug, json_logs=settings.json_logs, level=settings.log_level)
    args = build_parser().parse_args(argv)

    try:
        config = load_run_config(args.config, args.overrides, seed_override=settings.seed_override)
        logger.info(
            "Resolved configuration",
            extra={"extra_data": {"command": args.command, "config": config.flatten()}},
        )
        return args.handler(args, config)
    except AppException as e:
        logger.error(
            e.message,
            extra={"extra_data": {"command": args.command, "error": type(e).__name__, "exit_code": e.exit_code}},
        )
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure", extra={"extra_data": {"command": args.command}})
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
