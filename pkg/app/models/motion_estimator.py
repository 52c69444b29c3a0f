"""
Coarse-to-fine bidirectional motion estimator.

A shared feature pyramid is built for both frames; at each level, from the
coarsest, the target features are backward-warped onto the source grid by
the current flow, correlated locally and a per-level head predicts a flow
update. F_0->1 and F_1->0 run through the same weights with swapped inputs.
"""

from dataclasses import dataclass
from typing import List

import torch
import torch.nn as nn
import torch.nn.functional as F

from models.flow_upsampling import conv_relu, upsample_bilinear
from ops.flow_core import backward_warp, check_same_size
from schemas.motion import PyramidConfig
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ContractViolationError


@dataclass
class BiFlow:
    """Bidirectional flows at estimation resolution."""

    f01: torch.Tensor
    f10: torch.Tensor


def correlation_volume(feat0: torch.Tensor, feat1: torch.Tensor, radius: int) -> torch.Tensor:
    """
    Dot products of channel-normalized features over a (2r+1)^2 window.

    Channel k = (dy + r) * (2r + 1) + (dx + r) holds <f0(p), f1(p + (dx, dy))>;
    shifts past the border correlate with zeros.
    """
    check_same_size("correlation_volume", feat0, feat1)
    _, _, h, w = feat0.shape
    f0 = F.normalize(feat0, dim=1)
    f1 = F.pad(F.normalize(feat1, dim=1), (radius, radius, radius, radius))
    costs = []
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            shifted = f1[:, :, radius + dy:radius + dy + h, radius + dx:radius + dx + w]
            costs.append((f0 * shifted).sum(dim=1))
    return torch.stack(costs, dim=1)


class PyramidEncoder(nn.Module):
    """Stride-2 conv stages; level l has base_channels * 2^l channels."""

    def __init__(self, levels: int, base_channels: int):
        super().__init__()
        self.levels = levels
        stages = []
        in_channels = 3
        for level in range(levels):
            out_channels = base_channels * (2 ** level)
            stages.append(nn.Sequential(
                conv_relu(in_channels, out_channels, stride=2),
                conv_relu(out_channels, out_channels),
            ))
            in_channels = out_channels
        self.stages = nn.ModuleList(stages)

    def forward(self, frame: torch.Tensor) -> List[torch.Tensor]:
        divisor = 2 ** self.levels
        for size in frame.shape[-2:]:
            if size % divisor != 0:
                raise ContractViolationError(ERROR_MESSAGES["not_divisible"].format(
                    what="extract_pyramid", size=size, divisor=divisor))
        features = []
        x = frame
        for stage in self.stages:
            x = stage(x)
            features.append(x)
        return features


class FlowUpdateHead(nn.Module):
    def __init__(self, corr_channels: int, feat_channels: int, width: int):
        super().__init__()
        self.body = nn.Sequential(
            conv_relu(corr_channels + feat_channels + 2, width),
            conv_relu(width, width),
            nn.Conv2d(width, 2, 3, padding=1),
        )

    def forward(self, corr: torch.Tensor, feat0: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
        return self.body(torch.cat([corr, feat0, flow], dim=1))


class MotionEstimator(nn.Module):
    """Estimates F_0->1 and F_1->0 at 1/downsample of the input resolution."""

    def __init__(self, cfg: PyramidConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = PyramidEncoder(cfg.levels, cfg.base_channels)
        corr_channels = (2 * cfg.corr_radius + 1) ** 2
        self.heads = nn.ModuleList(
            FlowUpdateHead(corr_channels, cfg.base_channels * (2 ** level), 2 * cfg.base_channels)
            for level in range(cfg.levels)
        )

    def extract_pyramid(self, frame: torch.Tensor) -> List[torch.Tensor]:
        """Feature maps finest first, each half the previous resolution."""
        return self.encoder(frame)

    def refine_level(
        self,
        level: int,
        feat0: torch.Tensor,
        feat1: torch.Tensor,
        flow_init: torch.Tensor,
    ) -> torch.Tensor:
        """
        One warp-correlate-update step: returns flow_init + delta.

        feat0 and feat1 are aligned by backward-warping feat1 onto feat0's grid
        with flow_init: feat1 is sampled at p + flow_init(p). This is the
        backward-warp form of moving feat0 toward feat1 along the flow; the
        correlation stays on feat0's grid, where the flow lives.
        """
        check_same_size("refine_level", feat0, feat1)
        aligned, _ = backward_warp(feat1, flow_init)
        corr = correlation_volume(feat0, aligned, self.cfg.corr_radius)
        return flow_init + self.heads[level](corr, feat0, flow_init)

    def coarse_to_fine(self, pyramid0: List[torch.Tensor], pyramid1: List[torch.Tensor]) -> torch.Tensor:
        coarsest = pyramid0[-1]
        b, _, h, w = coarsest.shape
        flow = coarsest.new_zeros((b, 2, h, w))
        for level in reversed(range(self.cfg.levels)):
            if level != self.cfg.levels - 1:
                flow = upsample_bilinear(flow, 2)
            flow = self.refine_level(level, pyramid0[level], pyramid1[level], flow)
        # finest pyramid level sits at half the estimation resolution
        return upsample_bilinear(flow, 2)

    def downsample_frame(self, frame: torch.Tensor) -> torch.Tensor:
        factor = self.cfg.downsample
        return F.avg_pool2d(frame, factor) if factor > 1 else frame

    def forward(self, i0: torch.Tensor, i1: torch.Tensor) -> BiFlow:
        check_same_size("estimate_motion", i0, i1)
        small0 = self.downsample_frame(i0)
        small1 = self.downsample_frame(i1)
        pyramid0 = self.extract_pyramid(small0)
        pyramid1 = self.extract_pyramid(small1)
        f01 = self.coarse_to_fine(pyramid0, pyramid1)
        f10 = self.coarse_to_fine(pyramid1, pyramid0)
        return BiFlow(f01=clamp_flow(f01), f10=clamp_flow(f10))


def clamp_flow(flow: torch.Tensor) -> torch.Tensor:
    """Keep |u| < width and |v| < height."""
    h, w = flow.shape[-2:]
    u = flow[:, 0:1].clamp(-(w - 1), w - 1)
    v = flow[:, 1:2].clamp(-(h - 1), h - 1)
    return torch.cat([u, v], dim=1)
