"""
Pydantic schemas for flow upsampling.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator


class UpsamplerBackend(str, Enum):
    """Available flow-upsampling backends."""

    BILINEAR = "bilinear"
    AFU = "afu"
    GFU = "gfu"


class UpsamplerConfig(BaseModel):
    """Flow upsampler settings (config namespace ``upsampler``)."""

    model_config = ConfigDict(extra="forbid")

    backend: UpsamplerBackend = Field(
        UpsamplerBackend.GFU,
        description="bilinear, afu (adaptive 3x3 kernel) or gfu (frame-guided residual)",
        examples=["gfu"],
    )
    factor: int = Field(2, ge=1, description="Resolution ratio, power of 2", examples=[2])
    guidance_channels: int = Field(16, ge=1, description="Width of the guidance conv stack", examples=[16])
    kernel_size: int = Field(3, description="AFU neighbourhood size")

    @field_validator("factor")
    @classmethod
    def validate_power_of_two(cls, v: int) -> int:
        """Ensure the factor is a power of two."""
        if v & (v - 1) != 0:
            raise ValueError("factor must be a power of 2")
        return v

    @field_validator("kernel_size")
    @classmethod
    def validate_kernel_size(cls, v: int) -> int:
        """AFU combines a fixed 3x3 neighbourhood."""
        if v != 3:
            raise ValueError("kernel_size must be 3")
        return v
