"""
Pydantic schemas for evaluation.
"""

from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class EvalConfig(BaseModel):
    """Metric settings (config namespace ``eval``)."""

    model_config = ConfigDict(extra="forbid")

    canny_low: float = Field(0.1, ge=0, description="Canny hysteresis low threshold")
    canny_high: float = Field(0.2, ge=0, description="Canny hysteresis high threshold")
    canny_sigma: float = Field(1.0, ge=0, description="Gaussian smoothing before Canny")
    edge_dilation: int = Field(1, ge=0, description="Edge-mask dilation radius in pixels")
    synthetic_count: int = Field(50, ge=1, description="Held-out synthetic triplets when no folder is given")
    synthetic_seed: int = Field(10_000, description="First seed of the held-out synthetic set")
    synthetic_size: int = Field(128, ge=16)
    plugins: List[str] = Field(default_factory=list, description="External metric plugins to report")

    @field_validator("plugins", mode="before")
    @classmethod
    def split_plugins(cls, v):
        """Flat config files carry the plugin list comma-separated."""
        if v is None:
            return []
        if isinstance(v, str):
            return [name.strip() for name in v.split(",") if name.strip()]
        return v

    @model_validator(mode="after")
    def validate_thresholds(self) -> "EvalConfig":
        """Hysteresis needs low <= high."""
        if self.canny_low > self.canny_high:
            raise ValueError("canny_low must not exceed canny_high")
        return self
