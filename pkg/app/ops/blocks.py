"""
Block grids: splitting feature maps into (optionally overlapping) s x s blocks,
reassembling non-overlapping grids, and converting flows to grid units.

Tensors are NCHW. A grid stores its blocks as (B, grid_h, grid_w, C, s, s).
"""

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from utils.constants import ERROR_MESSAGES
from utils.exceptions import ContractViolationError


@dataclass(frozen=True)
class BlockGrid:
    """Grid of s x s x C blocks; block (x, y) has its origin at (x*stride, y*stride)."""

    blocks: torch.Tensor
    stride: int
    s: int

    @property
    def grid_h(self) -> int:
        return self.blocks.shape[1]

    @property
    def grid_w(self) -> int:
        return self.blocks.shape[2]

    @property
    def channels(self) -> int:
        return self.blocks.shape[3]

    def flat(self) -> torch.Tensor:
        """Blocks as (B, grid_h * grid_w, C * s * s)."""
        b = self.blocks.shape[0]
        return self.blocks.reshape(b, self.grid_h * self.grid_w, -1)

    def with_blocks(self, blocks: torch.Tensor) -> "BlockGrid":
        return BlockGrid(blocks=blocks, stride=self.stride, s=self.s)


def split_blocks(tex: torch.Tensor, s: int, stride: int) -> BlockGrid:
    """
    Split a texture into s x s blocks with origins every ``stride`` pixels.

    Blocks overlap when stride < s; blocks running past the right or bottom
    border read edge-clamped pixels.

    Args:
        tex: (B, C, h, w) texture
        s: Block side
        stride: Distance between block origins

    Returns:
        BlockGrid of (h / stride) x (w / stride) blocks

    Raises:
        ContractViolationError: h or w not divisible by stride, or s < stride
    """
    if tex.dim() != 4:
        raise ContractViolationError(ERROR_MESSAGES["invalid_argument"].format(
            what="split_blocks", detail=f"expected NCHW texture, got shape {tuple(tex.shape)}"))
    if s < stride:
        raise ContractViolationError(ERROR_MESSAGES["invalid_argument"].format(
            what="split_blocks", detail=f"block side {s} smaller than stride {stride}"))
    b, c, h, w = tex.shape
    for size in (h, w):
        if size % stride != 0:
            raise ContractViolationError(ERROR_MESSAGES["not_divisible"].format(
                what="split_blocks", size=size, divisor=stride))

    overhang = s - stride
    padded = F.pad(tex, (0, overhang, 0, overhang), mode="replicate") if overhang else tex
    grid_h, grid_w = h // stride, w // stride
    # (B, C*s*s, grid_h*grid_w), inner order (C, row, col)
    columns = F.unfold(padded, kernel_size=s, stride=stride)
    blocks = columns.transpose(1, 2).reshape(b, grid_h, grid_w, c, s, s)
    return BlockGrid(blocks=blocks, stride=stride, s=s)


def assemble_blocks(grid: BlockGrid) -> torch.Tensor:
    """
    Place the blocks of a non-overlapping grid back into a texture.

    Raises:
        ContractViolationError: grid stride differs from the block side
    """
    if grid.stride != grid.s:
        raise ContractViolationError(ERROR_MESSAGES["invalid_argument"].format(
            what="assemble_blocks", detail="only non-overlapping grids (stride == s) can be assembled"))
    b = grid.blocks.shape[0]
    c, s = grid.channels, grid.s
    # (B, gh, gw, C, s, s) -> (B, C, gh, s, gw, s)
    tex = grid.blocks.permute(0, 3, 1, 4, 2, 5)
    return tex.reshape(b, c, grid.grid_h * s, grid.grid_w * s)


def flow_to_block_grid(flow_fine: torch.Tensor, stride: int) -> torch.Tensor:
    """
    Nearest-mode downsample of a texture-resolution flow to block-grid resolution.

    Each grid cell takes the flow at its block origin; displacements are
    divided by the stride so they count grid cells.
    """
    _, _, h, w = flow_fine.shape
    for size in (h, w):
        if size % stride != 0:
            raise ContractViolationError(ERROR_MESSAGES["not_divisible"].format(
                what="flow_to_block_grid", size=size, divisor=stride))
    if stride == 1:
        return flow_fine
    coarse = F.interpolate(flow_fine, size=(h // stride, w // stride), mode="nearest")
    return coarse / stride
