"""Schemas module."""

from schemas.evaluation import EvalConfig
from schemas.loss import LossConfig, LossVariant, LossWeights
from schemas.motion import FrameWarpMode, PyramidConfig
from schemas.run_config import RunConfig, load_run_config, parse_config_lines
from schemas.texture import MatchConfig
from schemas.training import TrainConfig
from schemas.upsampler import UpsamplerBackend, UpsamplerConfig

__all__ = [
    "EvalConfig",
    "LossConfig",
    "LossVariant",
    "LossWeights",
    "FrameWarpMode",
    "PyramidConfig",
    "RunConfig",
    "load_run_config",
    "parse_config_lines",
    "MatchConfig",
    "TrainConfig",
    "UpsamplerBackend",
    "UpsamplerConfig",
]
