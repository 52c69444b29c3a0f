"""
Perceptual backbones for the Style loss.

A backbone maps an RGB batch in [0, 1] to a list of stage feature maps and
is frozen: its parameters never receive gradients.
"""

from typing import List

import torch
import torch.nn as nn

from utils import get_logger
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ConfigurationError

logger = get_logger(__name__)

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# relu1_2, relu2_2, relu3_4, relu4_4
VGG19_STAGE_ENDS = (4, 9, 18, 27)


class PerceptualBackbone(nn.Module):
    """Frozen feature extractor exposing a fixed number of stages."""

    def freeze(self) -> "PerceptualBackbone":
        for param in self.parameters():
            param.requires_grad_(False)
        return self.eval()

    def train(self, mode: bool = True) -> "PerceptualBackbone":
        # Stays in eval mode whatever the owning model does
        return super().train(False)


class VGG19Backbone(PerceptualBackbone):
    """ImageNet-normalized VGG-19 conv stages."""

    def __init__(self, pretrained: bool = True):
        super().__init__()
        from torchvision.models import VGG19_Weights, vgg19

        weights = VGG19_Weights.IMAGENET1K_V1 if pretrained else None
        features = vgg19(weights=weights).features
        self.stages = nn.ModuleList()
        start = 0
        for end in VGG19_STAGE_ENDS:
            self.stages.append(features[start:end])
            start = end
        self.register_buffer("mean", torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(IMAGENET_STD).view(1, 3, 1, 1))
        self.freeze()
        logger.info(
            "VGG-19 perceptual backbone ready",
            extra={"extra_data": {"pretrained": pretrained, "stages": len(self.stages)}},
        )

    def forward(self, image: torch.Tensor) -> List[torch.Tensor]:
        x = (image - self.mean.to(image.dtype)) / self.std.to(image.dtype)
        outputs = []
        for stage in self.stages:
            x = stage(x)
            outputs.append(x)
        return outputs


class StubBackbone(PerceptualBackbone):
    """Fixed-seed two-layer conv stack; needs no downloads."""

    def __init__(self, seed: int = 0, width: int = 8):
        super().__init__()
        generator = torch.Generator().manual_seed(seed)
        self.conv1 = nn.Conv2d(3, width, 3, padding=1)
        self.conv2 = nn.Conv2d(width, width, 3, padding=1, stride=2)
        with torch.no_grad():
            for conv in (self.conv1, self.conv2):
                conv.weight.copy_(torch.randn(conv.weight.shape, generator=generator) * 0.3)
                conv.bias.copy_(torch.randn(conv.bias.shape, generator=generator) * 0.1)
        self.freeze()

    def forward(self, image: torch.Tensor) -> List[torch.Tensor]:
        first = torch.tanh(self.conv1(image))
        second = torch.tanh(self.conv2(first))
        return [first, second]


def build_backbone(name: str, pretrained: bool = True) -> PerceptualBackbone:
    """
    Create the named perceptual backbone.

    Raises:
        ConfigurationError: Unknown backbone name
    """
    if name == "vgg19":
        return VGG19Backbone(pretrained=pretrained)
    if name == "stub":
        return StubBackbone()
    raise ConfigurationError(ERROR_MESSAGES["unknown_backbone"].format(name=name))
