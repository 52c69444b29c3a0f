"""
Tests for block splitting, assembly and grid-unit flows.
"""

import pytest
import torch

from ops.blocks import assemble_blocks, flow_to_block_grid, split_blocks
from utils.exceptions import ContractViolationError


class TestSplitBlocks:
    """Test suite for split_blocks."""

    def test_non_overlapping_roundtrip(self, torch_generator):
        """assemble(split(x)) is x when stride equals the block side."""
        tex = torch.rand(2, 3, 8, 12, generator=torch_generator)
        grid = split_blocks(tex, 4, 4)

        assert (grid.grid_h, grid.grid_w, grid.channels) == (2, 3, 3)
        assert torch.equal(assemble_blocks(grid), tex)

    def test_overlapping_block_contents(self, torch_generator):
        """Block (x, y) starts at (x * stride, y * stride); overhang reads the clamped edge."""
        tex = torch.rand(1, 2, 8, 8, generator=torch_generator)
        grid = split_blocks(tex, 4, 2)

        assert grid.blocks.shape == (1, 4, 4, 2, 4, 4)
        assert torch.equal(grid.blocks[0, 1, 2], tex[0, :, 2:6, 4:8])
        last = grid.blocks[0, 3, 3]
        assert torch.equal(last[:, :2, :2], tex[0, :, 6:8, 6:8])
        assert torch.equal(last[:, :2, 2], tex[0, :, 6:8, 7])
        assert torch.equal(last[:, 3, 3], tex[0, :, 7, 7])

    def test_not_divisible(self):
        with pytest.raises(ContractViolationError):
            split_blocks(torch.zeros(1, 1, 9, 8), 4, 2)

    def test_side_smaller_than_stride(self):
        with pytest.raises(ContractViolationError):
            split_blocks(torch.zeros(1, 1, 8, 8), 2, 4)

    def test_assemble_rejects_overlap(self):
        grid = split_blocks(torch.zeros(1, 1, 8, 8), 4, 2)
        with pytest.raises(ContractViolationError):
            assemble_blocks(grid)


class TestFlowToBlockGrid:
    """Test suite for flow_to_block_grid."""

    def test_constant_flow_in_cells(self):
        flow = torch.full((1, 2, 8, 8), 4.0)
        grid_flow = flow_to_block_grid(flow, 2)

        assert grid_flow.shape == (1, 2, 4, 4)
        assert torch.all(grid_flow == 2.0)

    def test_samples_block_origin(self):
        """Each cell takes the flow at its block origin."""
        cols = torch.arange(8, dtype=torch.float32).view(1, 1, 1, 8).expand(1, 2, 8, 8)
        grid_flow = flow_to_block_grid(cols.clone(), 2)

        assert grid_flow[0, 0, 0].tolist() == [0.0, 1.0, 2.0, 3.0]

    def test_stride_one_is_identity(self, torch_generator):
        flow = torch.rand(1, 2, 4, 4, generator=torch_generator)
        assert flow_to_block_grid(flow, 1) is flow

    def test_not_divisible(self):
        with pytest.raises(ContractViolationError):
            flow_to_block_grid(torch.zeros(1, 2, 6, 6), 4)
