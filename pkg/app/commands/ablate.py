"""
``ablate-upsampling``: compare checkpoints that differ only in upsampler backend.
"""

import argparse

from schemas.run_config import RunConfig
from services.benchmark_service import (
    ablation_rows,
    check_ablation_configs,
    evaluate_model,
    iter_eval_triplets,
    write_ablation_report,
)
from services.interpolation_service import InterpolationService
from utils import get_logger, log_exceptions, measure_time
from utils.constants import EXIT_OK

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("ablate-upsampling", help="Upsampling backend comparison table")
    parser.add_argument("--checkpoints", nargs=3, required=True, metavar="CKPT")
    parser.add_argument("--dataset", help="Triplet folder; the held-out synthetic suite when omitted")
    parser.add_argument("--report", required=True, help="Report path; .csv and .md are written next to it")
    parser.set_defaults(handler=run)


@measure_time
@log_exceptions
def run(args: argparse.Namespace, config: RunConfig) -> int:
    """
    Raises:
        CheckpointError: A checkpoint is missing or unreadable
        ConfigurationError: Checkpoint configs differ beyond upsampler.backend
    """
    services = [InterpolationService.from_checkpoint(path) for path in args.checkpoints]
    check_ablation_configs([service.config for service in services])

    backends = [service.config.upsampler.backend.value for service in services]
    reports = [
        evaluate_model(service, iter_eval_triplets(config, args.dataset), config)
        for service in services
    ]
    rows = ablation_rows(backends, reports)
    write_ablation_report(args.report, rows)
    logger.info("Ablation report written", extra={"extra_data": {"report": str(args.report), "backends": backends}})
    return EXIT_OK
