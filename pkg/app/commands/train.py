"""
``train``: fit a model and write checkpoints to an output directory.
"""

import argparse

from schemas.run_config import RunConfig
from services.training_service import Trainer
from utils import get_logger, log_exceptions, measure_time
from utils.constants import EXIT_OK

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Train the interpolator")
    parser.add_argument("--output-dir", required=True, help="Checkpoint and diagnostics directory")
    parser.add_argument("--iterations", type=int, help="Override train.iterations")
    parser.set_defaults(handler=run)


@measure_time
@log_exceptions
def run(args: argparse.Namespace, config: RunConfig) -> int:
    trainer = Trainer(config, args.output_dir)
    final = trainer.fit(iterations=args.iterations)
    logger.info("Final checkpoint", extra={"extra_data": {"checkpoint": str(final)}})
    return EXIT_OK
