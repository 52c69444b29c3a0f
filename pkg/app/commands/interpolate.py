"""
``interpolate``: synthesize one intermediate frame from two PNGs.
"""

import argparse
from pathlib import Path

from schemas.run_config import RunConfig
from services.interpolation_service import InterpolationService
from services.visualization import flow_to_color, match_payloads
from storage import encode_flo, encode_png, read_png, write_all
from utils import get_logger, log_exceptions, measure_time
from utils.constants import ERROR_MESSAGES, EXIT_OK
from utils.exceptions import InputError

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("interpolate", help="Interpolate the frame at time t between two frames")
    parser.add_argument("frame0", help="First frame (PNG)")
    parser.add_argument("frame1", help="Second frame (PNG)")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--out", required=True, help="Output PNG")
    parser.add_argument("-t", "--time", type=float, default=0.5, dest="t", help="Time step in (0, 1)")
    parser.add_argument("--dump-flow", metavar="DIR", help="Write upsampled flows as .flo plus colour-wheel PNGs")
    parser.add_argument("--dump-matches", metavar="DIR", help="Write the match map as PNG triptych plus CSV")
    parser.set_defaults(handler=run)


@measure_time
@log_exceptions
def run(args: argparse.Namespace, config: RunConfig) -> int:
    """
    Raises:
        InputError: Bad time step, unreadable or mismatched frames
        CheckpointError: Unreadable checkpoint
    """
    if not 0.0 < args.t < 1.0:
        raise InputError(ERROR_MESSAGES["invalid_argument"].format(
            what="--time", detail=f"must lie in (0, 1), got {args.t}"))

    i0 = read_png(args.frame0)
    i1 = read_png(args.frame1)
    if i0.shape != i1.shape:
        raise InputError(ERROR_MESSAGES["frames_size_mismatch"].format(left=i0.shape, right=i1.shape))

    service = InterpolationService.from_checkpoint(args.checkpoint)
    result = service.interpolate(i0, i1, t=args.t)

    # the frame and every dump are committed together
    payloads = {Path(args.out): encode_png(result.frame)}
    if args.dump_flow:
        flow_dir = Path(args.dump_flow)
        for name, flow in (("flow01", result.f01_up), ("flow10", result.f10_up)):
            payloads[flow_dir / f"{name}.flo"] = encode_flo(flow)
            payloads[flow_dir / f"{name}.png"] = encode_png(flow_to_color(flow))
    if args.dump_matches and result.matches is not None:
        match_dir = Path(args.dump_matches)
        payloads.update(match_payloads(result.matches, match_dir / "matches.png", match_dir / "matches.csv"))
    elif args.dump_matches:
        logger.warning("Texture mapping disabled; no match map to dump")
    write_all(payloads)

    logger.info("Frame written", extra={"extra_data": {"out": str(args.out), "t": args.t}})
    return EXIT_OK
