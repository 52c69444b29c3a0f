"""
Pydantic schemas for training and synthetic data.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    """Training loop settings (config namespace ``train``)."""

    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(20000, ge=0, examples=[20000])
    batch_size: int = Field(4, ge=1, examples=[4])
    crop_size: int = Field(256, ge=8, description="Square training crop side", examples=[256])
    learning_rate: float = Field(1e-4, gt=0)
    weight_decay: float = Field(1e-4, ge=0)
    warmup_steps: int = Field(0, ge=0, description="Linear warmup before the constant rate")
    seed: int = Field(0, description="Global seed; VTINKER_SEED overrides it")
    freeze_motion: bool = Field(False, description="Keep estimator parameters fixed")
    checkpoint_every: int = Field(1000, ge=1)
    log_every: int = Field(50, ge=1)
    num_workers: int = Field(0, ge=0, description="Data worker processes; 0 keeps generation in-process")
    dataset_dir: Optional[str] = Field(None, description="Triplet folder; synthetic data when unset")
    max_displacement: float = Field(32.0, ge=0, description="Largest synthetic sprite motion in pixels")
    sprites_min: int = Field(1, ge=0)
    sprites_max: int = Field(4, ge=0)
    affine_probability: float = Field(0.25, ge=0, le=1)
    sharp_edges: bool = Field(False, description="Flat-coloured sprites for the edge ablation suite")
    time_step: float = Field(0.5, gt=0, lt=1, description="Training time step (triplet middle frame)")
