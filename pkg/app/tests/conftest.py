"""
Test configuration and fixtures.
"""

import os
from pathlib import Path
from typing import Callable

import numpy as np
import pytest
import torch

# Set test environment variables before importing app
os.environ["TEXMAP_DEVICE"] = "cpu"
os.environ["TEXMAP_NUM_THREADS"] = "1"
os.environ.pop("VTINKER_SEED", None)

from models.backbone import StubBackbone
from models.interpolator import FrameInterpolator
from schemas import (
    EvalConfig,
    LossConfig,
    MatchConfig,
    PyramidConfig,
    RunConfig,
    TrainConfig,
    UpsamplerConfig,
)
from storage import save_checkpoint, write_png
from services.synthetic_data import generate_synthetic_triplet


def build_small_config(**sections) -> RunConfig:
    """Tiny pipeline: 32x32 frames, 4-pixel blocks, stub perceptual backbone."""
    defaults = dict(
        motion=PyramidConfig(levels=2, base_channels=4, corr_radius=1, downsample=2),
        upsampler=UpsamplerConfig(guidance_channels=4),
        texture=MatchConfig(s=4, N=3, C=8, Cprime=4),
        loss=LossConfig(backbone="stub"),
        train=TrainConfig(
            iterations=2,
            batch_size=1,
            crop_size=32,
            checkpoint_every=1,
            log_every=1,
            max_displacement=4.0,
        ),
        eval=EvalConfig(synthetic_count=2, synthetic_size=32),
    )
    defaults.update(sections)
    return RunConfig(**defaults)


@pytest.fixture
def small_config() -> RunConfig:
    return build_small_config()


@pytest.fixture
def small_model(small_config) -> FrameInterpolator:
    """Freshly initialized interpolator with a fixed seed."""
    torch.manual_seed(0)
    return FrameInterpolator(small_config).eval()


@pytest.fixture
def stub_backbone() -> StubBackbone:
    return StubBackbone(seed=0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def torch_generator() -> torch.Generator:
    return torch.Generator().manual_seed(1234)


@pytest.fixture
def checkpoint_factory(tmp_path) -> Callable[..., Path]:
    """Write a checkpoint of a fresh small model; keyword args replace config sections."""

    def factory(name: str = "model.txmp", seed: int = 0, **sections) -> Path:
        config = build_small_config(**sections)
        torch.manual_seed(seed)
        model = FrameInterpolator(config)
        path = tmp_path / name
        save_checkpoint(path, model.sections(), config, step=0)
        return path

    return factory


@pytest.fixture
def triplet_root(tmp_path) -> Path:
    """Two synthetic 32x32 triplet folders on disk."""
    root = tmp_path / "triplets"
    for index, seed in enumerate((5, 6)):
        triplet = generate_synthetic_triplet(seed, size=32)
        folder = root / f"seq{index:02d}"
        for name, frame in (("im1.png", triplet.i0), ("im2.png", triplet.it), ("im3.png", triplet.i1)):
            write_png(folder / name, frame)
    return root


@pytest.fixture
def config_file(tmp_path, small_config) -> Path:
    """The small configuration written as a flat ``key = value`` file."""

    def render(value) -> str:
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, list):
            return ",".join(value)
        if value is None:
            return "none"
        return str(value)

    lines = ["# small test configuration"]
    lines += [f"{key} = {render(value)}" for key, value in sorted(small_config.flatten().items())]
    path = tmp_path / "small.cfg"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def config_builder() -> Callable[..., RunConfig]:
    """build_small_config with some sections replaced."""
    return build_small_config
