"""
Flow and image primitives shared by every stage of the pipeline.

Conventions:
    * Tensors are NCHW; a flow has two channels (u, v) = (dcolumn, drow) in
      pixels of its own resolution, sampled at pixel centres.
    * Backward warping samples outside the source with zero padding and
      reports a validity mask (1 = every tap with nonzero weight in bounds).
"""

from enum import Enum
from typing import Tuple, Union

import torch

from ops.blocks import BlockGrid
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ContractViolationError


class TimeDirection(str, Enum):
    """Which input frame a forward flow is anchored at."""

    FORWARD0 = "forward0"  # F_0->1, scaled by t
    FORWARD1 = "forward1"  # F_1->0, scaled by (1 - t)


def check_flow(flow: torch.Tensor, what: str) -> None:
    """Raise unless ``flow`` is a (B, 2, H, W) tensor."""
    if flow.dim() != 4 or flow.shape[1] != 2:
        raise ContractViolationError(ERROR_MESSAGES["invalid_argument"].format(
            what=what, detail=f"expected a (B, 2, H, W) flow, got shape {tuple(flow.shape)}"))


def check_same_size(what: str, left: torch.Tensor, right: torch.Tensor) -> None:
    """Raise unless both NCHW tensors share batch and spatial size."""
    if left.shape[0] != right.shape[0] or left.shape[-2:] != right.shape[-2:]:
        raise ContractViolationError(ERROR_MESSAGES["size_mismatch"].format(
            what=what,
            left=tuple(left.shape),
            right=tuple(right.shape),
        ))


def backward_warp(source: torch.Tensor, flow: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Bilinearly sample ``source`` at p + flow(p).

    Args:
        source: (B, C, H, W) frame or texture
        flow: (B, 2, H, W) displacement in pixels

    Returns:
        Tuple of the warped tensor (B, C, H, W) and the validity mask (B, 1, H, W)

    Raises:
        ContractViolationError: Source and flow differ in size
    """
    check_flow(flow, "backward_warp")
    check_same_size("backward_warp", source, flow)
    b, c, h, w = source.shape

    rows = torch.arange(h, device=source.device, dtype=source.dtype).view(1, h, 1)
    cols = torch.arange(w, device=source.device, dtype=source.dtype).view(1, 1, w)
    x = cols + flow[:, 0]
    y = rows + flow[:, 1]

    x0 = torch.floor(x)
    y0 = torch.floor(y)
    wx = x - x0
    wy = y - y0
    x0 = x0.long()
    y0 = y0.long()

    flat = source.reshape(b, c, h * w)
    warped = torch.zeros_like(source)
    valid = torch.ones((b, h, w), dtype=torch.bool, device=source.device)

    taps = (
        (0, 0, (1 - wx) * (1 - wy)),
        (1, 0, wx * (1 - wy)),
        (0, 1, (1 - wx) * wy),
        (1, 1, wx * wy),
    )
    for dx, dy, weight in taps:
        xi = x0 + dx
        yi = y0 + dy
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        valid &= inside | (weight == 0)
        index = (yi.clamp(0, h - 1) * w + xi.clamp(0, w - 1)).reshape(b, 1, h * w)
        values = flat.gather(2, index.expand(b, c, h * w)).reshape(b, c, h, w)
        warped = warped + values * (weight * inside.to(source.dtype)).unsqueeze(1)

    return warped, valid.to(source.dtype).unsqueeze(1)


def scale_flow_to_time(
    flow: torch.Tensor,
    t: float,
    direction: Union[TimeDirection, str],
) -> torch.Tensor:
    """
    Map a full-interval forward flow to time step t in a linear function.

    forward0: F_0->t = t * F_0->1; forward1: F_1->t = (1 - t) * F_1->0.
    """
    check_flow(flow, "scale_flow_to_time")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ContractViolationError(ERROR_MESSAGES["invalid_time_step"].format(t=t))
    direction = TimeDirection(direction)
    if direction is TimeDirection.FORWARD0:
        return flow * t
    return flow * (1.0 - t)


def invert_forward_flow(flow: torch.Tensor) -> torch.Tensor:
    """
    Approximate backward flow from a forward flow: -1 * W(F, F).

    Positions whose self-warp sample falls outside the field get zero displacement.
    """
    check_flow(flow, "invert_forward_flow")
    warped, _ = backward_warp(flow, flow)
    return -warped


def round_half_away_from_zero(values: torch.Tensor) -> torch.Tensor:
    """Round to the nearest integer; exact halves move away from zero."""
    return torch.sign(values) * torch.floor(torch.abs(values) + 0.5)


def grid_gather_nearest(blocks: BlockGrid, backward_flow: torch.Tensor) -> BlockGrid:
    """
    Rearrange blocks: output (x, y) takes the block at (x + round(u), y + round(v)).

    Displacements are rounded, not positions, so an exact half cell always
    moves to the farther cell in either direction.

    Args:
        blocks: Grid to gather from
        backward_flow: (B, 2, grid_h, grid_w) displacement in grid cells

    Returns:
        BlockGrid of the same geometry whose every block is a copy of an input block

    Raises:
        ContractViolationError: Flow resolution differs from the grid resolution
    """
    check_flow(backward_flow, "grid_gather_nearest")
    b = blocks.blocks.shape[0]
    gh, gw = blocks.grid_h, blocks.grid_w
    if backward_flow.shape[0] != b or tuple(backward_flow.shape[-2:]) != (gh, gw):
        raise ContractViolationError(ERROR_MESSAGES["size_mismatch"].format(
            what="grid_gather_nearest",
            left=(b, gh, gw),
            right=tuple(backward_flow.shape),
        ))

    rows = torch.arange(gh, device=backward_flow.device, dtype=backward_flow.dtype).view(1, gh, 1)
    cols = torch.arange(gw, device=backward_flow.device, dtype=backward_flow.dtype).view(1, 1, gw)
    src_x = (cols + round_half_away_from_zero(backward_flow[:, 0])).clamp(0, gw - 1).long()
    src_y = (rows + round_half_away_from_zero(backward_flow[:, 1])).clamp(0, gh - 1).long()

    flat = blocks.flat()
    index = (src_y * gw + src_x).reshape(b, gh * gw, 1).expand(-1, -1, flat.shape[-1])
    gathered = flat.gather(1, index)
    return blocks.with_blocks(gathered.reshape(blocks.blocks.shape))
