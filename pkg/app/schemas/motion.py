"""
Pydantic schemas for the motion estimator configuration.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator


class FrameWarpMode(str, Enum):
    """How the time-scaled forward flows warp the input frames."""

    INVERTED = "inverted"
    DIRECT = "direct"


class PyramidConfig(BaseModel):
    """Coarse-to-fine estimator settings (config namespace ``motion``)."""

    model_config = ConfigDict(extra="forbid")

    levels: int = Field(3, ge=2, description="Pyramid levels", examples=[3])
    base_channels: int = Field(16, ge=1, description="Channels of the finest pyramid level", examples=[16])
    corr_radius: int = Field(3, ge=1, description="Local correlation radius in pixels", examples=[3])
    downsample: int = Field(
        2,
        ge=1,
        description="Input downscale factor before estimation (power of 2)",
        examples=[2],
    )
    frame_warp: FrameWarpMode = Field(
        FrameWarpMode.DIRECT,
        description="'direct' backward-warps with F_0->t; 'inverted' converts it into F_t->0 first (ablation)",
    )

    @field_validator("downsample")
    @classmethod
    def validate_power_of_two(cls, v: int) -> int:
        """Ensure the estimation downscale is a power of two."""
        if v & (v - 1) != 0:
            raise ValueError("downsample must be a power of 2")
        return v

    @property
    def size_multiple(self) -> int:
        """Frame sizes must be divisible by this to run the pyramid."""
        return self.downsample * (2 ** self.levels)
