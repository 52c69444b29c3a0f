"""
``flow-vis``: colour-wheel rendering of a .flo file.
"""

import argparse

from schemas.run_config import RunConfig
from services.visualization import flow_to_color
from storage import read_flo, write_png
from utils import log_exceptions, measure_time
from utils.constants import EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("flow-vis", help="Render a .flo file as a colour-wheel PNG")
    parser.add_argument("flow", help="Input .flo")
    parser.add_argument("--out", required=True, help="Output PNG")
    parser.add_argument("--max-mag", type=float, help="Magnitude mapped to full saturation (default: field max)")
    parser.set_defaults(handler=run)


@measure_time
@log_exceptions
def run(args: argparse.Namespace, config: RunConfig) -> int:
    write_png(args.out, flow_to_color(read_flo(args.flow), args.max_mag))
    return EXIT_OK
