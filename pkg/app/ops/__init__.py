"""Ops module: pure tensor functions."""

from ops.blocks import BlockGrid, assemble_blocks, flow_to_block_grid, split_blocks
from ops.flow_core import (
    TimeDirection,
    backward_warp,
    grid_gather_nearest,
    invert_forward_flow,
    scale_flow_to_time,
)
from ops.losses import (
    build_pair_loss,
    census_loss,
    charbonnier_loss,
    combined_loss,
    gram_matrix,
    style_loss,
)

__all__ = [
    "BlockGrid",
    "assemble_blocks",
    "flow_to_block_grid",
    "split_blocks",
    "TimeDirection",
    "backward_warp",
    "grid_gather_nearest",
    "invert_forward_flow",
    "scale_flow_to_time",
    "build_pair_loss",
    "census_loss",
    "charbonnier_loss",
    "combined_loss",
    "gram_matrix",
    "style_loss",
]
