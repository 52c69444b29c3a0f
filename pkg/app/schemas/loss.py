"""
Pydantic schemas for the training losses.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class LossVariant(str, Enum):
    """Per-pair loss families."""

    STYLE = "style"  # w_l L1 + w_VGG L_VGG + w_Gram L_Gram
    CC = "cc"        # Charbonnier + Census
    L1 = "l1"        # perception-free Style loss


class LossWeights(BaseModel):
    """Style-component and multi-supervision weights (``loss.weights``)."""

    model_config = ConfigDict(extra="forbid")

    w_l: float = Field(1.0, ge=0, description="L1 weight")
    w_vgg: float = Field(0.25, ge=0, description="Perceptual feature weight")
    w_gram: float = Field(40.0, ge=0, description="Gram matrix weight")
    w_t: float = Field(0.8, ge=0, description="Weight of the interpolated-frame term")
    w_0: float = Field(0.1, ge=0, description="Weight of the I0 reconstruction term")
    w_1: float = Field(0.1, ge=0, description="Weight of the I1 reconstruction term")


class LossConfig(BaseModel):
    """Loss settings (config namespace ``loss``)."""

    model_config = ConfigDict(extra="forbid")

    variant: LossVariant = Field(LossVariant.STYLE, examples=["style"])
    weights: LossWeights = Field(default_factory=LossWeights)
    backbone: str = Field("vgg19", description="Perceptual backbone: vgg19 or stub", examples=["vgg19"])
    charbonnier_eps: float = Field(1e-3, gt=0)
    census_weight: float = Field(1.0, ge=0)
