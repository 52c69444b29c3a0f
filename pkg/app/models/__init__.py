"""Models module."""

from models.backbone import PerceptualBackbone, StubBackbone, VGG19Backbone, build_backbone
from models.flow_upsampling import (
    AdaptiveFlowUpsampler,
    BilinearFlowUpsampler,
    FlowUpsampler,
    GuidedFlowUpsampler,
    upsample_bilinear,
)
from models.interpolator import FrameInterpolator, InterpolationOutput
from models.motion_estimator import BiFlow, MotionEstimator
from models.reconstruction import ReconstructionDecoder
from models.texture_mapping import MatchIndexMap, TextureMapper, TextureMappingResult

__all__ = [
    "PerceptualBackbone",
    "StubBackbone",
    "VGG19Backbone",
    "build_backbone",
    "AdaptiveFlowUpsampler",
    "BilinearFlowUpsampler",
    "FlowUpsampler",
    "GuidedFlowUpsampler",
    "upsample_bilinear",
    "FrameInterpolator",
    "InterpolationOutput",
    "BiFlow",
    "MotionEstimator",
    "ReconstructionDecoder",
    "MatchIndexMap",
    "TextureMapper",
    "TextureMappingResult",
]
