"""
Flow upsampling backends: bilinear, adaptive 3x3 kernel (AFU) and
frame-guided residual (GFU).

Every backend multiplies displacements by the factor so the result is in
fine-pixel units.
"""

from typing import Union

import torch
import torch.nn as nn
import torch.nn.functional as F

from ops.flow_core import check_flow
from schemas.upsampler import UpsamplerBackend, UpsamplerConfig
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ConfigurationError, ContractViolationError


def upsample_bilinear(flow_lo: torch.Tensor, factor: int) -> torch.Tensor:
    """Bilinear resize to (factor*h, factor*w) with values multiplied by factor."""
    check_flow(flow_lo, "upsample_bilinear")
    if factor == 1:
        return flow_lo
    return F.interpolate(flow_lo, scale_factor=factor, mode="bilinear", align_corners=False) * factor


def conv_relu(in_channels: int, out_channels: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_channels, out_channels, 3, stride=stride, padding=1),
        nn.LeakyReLU(0.1),
    )


class GuidanceExtractor(nn.Sequential):
    """Three stride-1 3x3 convs over the guide frame (receptive field 7)."""

    def __init__(self, width: int):
        super().__init__(
            conv_relu(3, width),
            conv_relu(width, width),
            conv_relu(width, width),
        )


def _check_guide(flow_lo: torch.Tensor, guide: torch.Tensor, factor: int, what: str) -> None:
    expected = (flow_lo.shape[-2] * factor, flow_lo.shape[-1] * factor)
    if tuple(guide.shape[-2:]) != expected or guide.shape[0] != flow_lo.shape[0]:
        raise ContractViolationError(ERROR_MESSAGES["size_mismatch"].format(
            what=what,
            left=(flow_lo.shape[0], *expected),
            right=tuple(guide.shape),
        ))


def afu_combine(flow_lo: torch.Tensor, logits: torch.Tensor, factor: int) -> torch.Tensor:
    """
    Softmax-weighted combination of the 3x3 low-res neighbourhood of each
    fine pixel's parent cell, times the factor.

    Args:
        flow_lo: (B, 2, h, w) low-resolution flow
        logits: (B, 9, factor*h, factor*w) kernel logits in row-major
            neighbourhood order
        factor: Resolution ratio

    Returns:
        (B, 2, factor*h, factor*w) flow
    """
    b, _, h, w = flow_lo.shape
    weights = torch.softmax(logits, dim=1)
    padded = F.pad(flow_lo, (1, 1, 1, 1), mode="replicate")
    neighbourhood = F.unfold(padded, kernel_size=3).reshape(b, 18, h, w)
    if factor > 1:
        neighbourhood = F.interpolate(neighbourhood, scale_factor=factor, mode="nearest")
    neighbourhood = neighbourhood.reshape(b, 2, 9, h * factor, w * factor)
    return (neighbourhood * weights.unsqueeze(1)).sum(dim=2) * factor


class AdaptiveFlowUpsampler(nn.Module):
    """Predicts a 3x3 sampling kernel per fine pixel (AFU)."""

    def __init__(self, factor: int, guidance_channels: int = 16):
        super().__init__()
        self.factor = factor
        self.guidance = GuidanceExtractor(guidance_channels)
        self.kernel_head = nn.Sequential(
            conv_relu(guidance_channels + 2, guidance_channels),
            nn.Conv2d(guidance_channels, 9, 3, padding=1),
        )

    def kernel_logits(self, flow_lo: torch.Tensor, features: torch.Tensor) -> torch.Tensor:
        coarse = upsample_bilinear(flow_lo, self.factor)
        return self.kernel_head(torch.cat([coarse, features], dim=1))

    def upsample_with_features(self, flow_lo: torch.Tensor, features: torch.Tensor) -> torch.Tensor:
        """AFU from precomputed fine-grid features."""
        check_flow(flow_lo, "upsample_afu")
        _check_guide(flow_lo, features, self.factor, "upsample_afu")
        return afu_combine(flow_lo, self.kernel_logits(flow_lo, features), self.factor)

    def forward(self, flow_lo: torch.Tensor, guide: torch.Tensor) -> torch.Tensor:
        check_flow(flow_lo, "upsample_afu")
        _check_guide(flow_lo, guide, self.factor, "upsample_afu")
        return self.upsample_with_features(flow_lo, self.guidance(guide))


class GuidedFlowUpsampler(nn.Module):
    """Bilinear upsampling plus a residual predicted from guide-frame features (GFU)."""

    def __init__(self, factor: int, guidance_channels: int = 16):
        super().__init__()
        self.factor = factor
        self.guidance = GuidanceExtractor(guidance_channels)
        self.correction = nn.Sequential(
            conv_relu(guidance_channels + 2, guidance_channels),
            conv_relu(guidance_channels, guidance_channels),
            nn.Conv2d(guidance_channels, 2, 3, padding=1),
        )
        # Starts from the bilinear solution
        nn.init.zeros_(self.correction[-1].weight)
        nn.init.zeros_(self.correction[-1].bias)

    def forward(self, flow_lo: torch.Tensor, guide: torch.Tensor) -> torch.Tensor:
        check_flow(flow_lo, "upsample_gfu")
        _check_guide(flow_lo, guide, self.factor, "upsample_gfu")
        coarse = upsample_bilinear(flow_lo, self.factor)
        residual = self.correction(torch.cat([coarse, self.guidance(guide)], dim=1))
        return coarse + residual


class BilinearFlowUpsampler(nn.Module):
    """Parameter-free backend; the guide is ignored."""

    def __init__(self, factor: int):
        super().__init__()
        self.factor = factor

    def forward(self, flow_lo: torch.Tensor, guide: torch.Tensor = None) -> torch.Tensor:
        return upsample_bilinear(flow_lo, self.factor)


def resolve_backend(backend: Union[str, UpsamplerBackend]) -> UpsamplerBackend:
    try:
        return UpsamplerBackend(backend)
    except ValueError:
        raise ConfigurationError(ERROR_MESSAGES["unknown_backend"].format(backend=backend))


class FlowUpsampler(nn.Module):
    """Dispatches to the configured backend."""

    def __init__(self, cfg: UpsamplerConfig):
        super().__init__()
        self.backend = resolve_backend(cfg.backend)
        self.factor = cfg.factor
        if self.backend is UpsamplerBackend.BILINEAR:
            self.impl = BilinearFlowUpsampler(cfg.factor)
        elif self.backend is UpsamplerBackend.AFU:
            self.impl = AdaptiveFlowUpsampler(cfg.factor, cfg.guidance_channels)
        else:
            self.impl = GuidedFlowUpsampler(cfg.factor, cfg.guidance_channels)

    def forward(self, flow_lo: torch.Tensor, guide: torch.Tensor) -> torch.Tensor:
        return self.impl(flow_lo, guide)
