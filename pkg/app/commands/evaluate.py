"""
``eval``: score a checkpoint on a triplet set.

Writes one CSV row per frame and a summary JSON that includes the overlay
baseline.
"""

import argparse

from schemas.run_config import RunConfig
from services.benchmark_service import evaluate_model, iter_eval_triplets, write_report
from services.interpolation_service import InterpolationService
from utils import get_logger, log_exceptions, measure_time
from utils.constants import EXIT_OK

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a checkpoint")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--dataset", help="Triplet folder; the held-out synthetic suite when omitted")
    parser.add_argument("--csv", required=True, help="Per-frame metrics CSV")
    parser.add_argument("--summary", required=True, help="Summary JSON")
    parser.set_defaults(handler=run)


@measure_time
@log_exceptions
def run(args: argparse.Namespace, config: RunConfig) -> int:
    service = InterpolationService.from_checkpoint(args.checkpoint)
    report = evaluate_model(service, iter_eval_triplets(config, args.dataset), config)
    write_report(report, args.csv, args.summary, config)
    return EXIT_OK
