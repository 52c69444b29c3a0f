"""
UNet-like decoder from the (H/2, W/2, C) latent space to an (H, W, 3) frame.

One instance decodes the fused latent L and both input textures.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from utils.constants import ERROR_MESSAGES
from utils.exceptions import ContractViolationError


def double_conv(in_channels: int, out_channels: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_channels, out_channels, 3, padding=1), nn.LeakyReLU(0.1),
        nn.Conv2d(out_channels, out_channels, 3, padding=1), nn.LeakyReLU(0.1),
    )


class ReconstructionDecoder(nn.Module):
    """Three-stage encoder/decoder with skips and a final x2 pixel shuffle."""

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.enc0 = double_conv(channels, channels)
        self.enc1 = nn.Sequential(nn.MaxPool2d(2), double_conv(channels, channels * 2))
        self.center = nn.Sequential(nn.MaxPool2d(2), double_conv(channels * 2, channels * 4))
        self.dec1 = double_conv(channels * 4 + channels * 2, channels * 2)
        self.dec0 = double_conv(channels * 2 + channels, channels)
        self.head = nn.Conv2d(channels, 3 * 4, 3, padding=1)
        self.shuffle = nn.PixelShuffle(2)
        # outputs start at mid-grey
        nn.init.constant_(self.head.bias, 0.5)

    def forward(self, latent: torch.Tensor) -> torch.Tensor:
        if latent.dim() != 4 or latent.shape[1] != self.channels:
            raise ContractViolationError(ERROR_MESSAGES["channel_mismatch"].format(
                what="reconstruct",
                expected=self.channels,
                actual=latent.shape[1] if latent.dim() == 4 else tuple(latent.shape),
            ))
        for size in latent.shape[-2:]:
            if size % 4 != 0:
                raise ContractViolationError(ERROR_MESSAGES["not_divisible"].format(
                    what="reconstruct", size=size, divisor=4))

        e0 = self.enc0(latent)
        e1 = self.enc1(e0)
        c = self.center(e1)
        d1 = self.dec1(torch.cat([F.interpolate(c, scale_factor=2, mode="bilinear", align_corners=False), e1], dim=1))
        d0 = self.dec0(torch.cat([F.interpolate(d1, scale_factor=2, mode="bilinear", align_corners=False), e0], dim=1))
        return self.shuffle(self.head(d0)).clamp(0.0, 1.0)
