"""
Pydantic schemas for texture mapping.
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator


class MatchConfig(BaseModel):
    """Block splitting and matching settings (config namespace ``texture``)."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    s: int = Field(8, ge=4, description="Block side in texture pixels", examples=[8])
    N: int = Field(3, ge=1, description="Odd search window side in texture-grid cells", examples=[3])
    C: int = Field(32, ge=1, description="Texture and proxy channels", examples=[32])
    Cprime: int = Field(16, ge=1, description="Index-vector channels", examples=[16])
    enabled: bool = Field(True, description="False feeds the proxy straight to the decoder")
    soft_match: bool = Field(False, description="Softmax-weighted candidate blend instead of hard argmax")
    match_temperature: float = Field(0.1, gt=0, description="Softmax temperature for soft_match")

    @field_validator("N")
    @classmethod
    def validate_odd_window(cls, v: int) -> int:
        """The search window is centred, so it must be odd."""
        if v % 2 == 0:
            raise ValueError("N must be odd")
        return v

    @field_validator("s")
    @classmethod
    def validate_block_side(cls, v: int) -> int:
        """Blocks halve twice (texture stride, index stride)."""
        if v % 4 != 0:
            raise ValueError("s must be divisible by 4")
        return v

    @property
    def texture_stride(self) -> int:
        """Texture blocks overlap by half a block."""
        return self.s // 2
