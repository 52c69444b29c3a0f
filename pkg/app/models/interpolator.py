"""
End-to-end frame interpolator: motion estimation, flow upsampling, time
warping, texture mapping and reconstruction.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import torch
import torch.nn as nn

from models.flow_upsampling import FlowUpsampler
from models.motion_estimator import BiFlow, MotionEstimator
from models.reconstruction import ReconstructionDecoder
from models.texture_mapping import TextureMapper, TextureMappingResult
from ops.flow_core import (
    TimeDirection,
    backward_warp,
    check_same_size,
    invert_forward_flow,
    scale_flow_to_time,
)
from schemas.motion import FrameWarpMode
from schemas.run_config import RunConfig
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ContractViolationError


@dataclass
class InterpolationOutput:
    """Everything one forward pass produces; reconstructions are optional."""

    frame: torch.Tensor
    i0_hat: Optional[torch.Tensor]
    i1_hat: Optional[torch.Tensor]
    biflow: BiFlow
    f01_up: torch.Tensor
    f10_up: torch.Tensor
    warped0: torch.Tensor
    warped1: torch.Tensor
    texture: TextureMappingResult


class FrameInterpolator(nn.Module):
    """Synthesizes the frame at time t between I_0 and I_1."""

    def __init__(self, cfg: RunConfig):
        super().__init__()
        self.size_multiple = cfg.size_multiple
        self.frame_warp = FrameWarpMode(cfg.motion.frame_warp)
        self.motion = MotionEstimator(cfg.motion)
        self.upsampler = FlowUpsampler(cfg.upsampler)
        self.texture = TextureMapper(cfg.texture)
        self.reconstruction = ReconstructionDecoder(cfg.texture.C)

    def sections(self) -> Dict[str, nn.Module]:
        """Named parameter sections, as stored in checkpoints."""
        return {
            "motion": self.motion,
            "upsampler": self.upsampler,
            "texture": self.texture,
            "reconstruction": self.reconstruction,
        }

    def warp_to_time(
        self,
        i0: torch.Tensor,
        i1: torch.Tensor,
        f01_up: torch.Tensor,
        f10_up: torch.Tensor,
        t: float,
    ) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        I_t^0 = W(I_0, F_0->t), I_t^1 = W(I_1, F_1->t).

        Returns the two warped frames and the time-scaled forward flows.
        """
        f0t = scale_flow_to_time(f01_up, t, TimeDirection.FORWARD0)
        f1t = scale_flow_to_time(f10_up, t, TimeDirection.FORWARD1)
        if self.frame_warp is FrameWarpMode.INVERTED:
            warp0, warp1 = invert_forward_flow(f0t), invert_forward_flow(f1t)
        else:
            warp0, warp1 = f0t, f1t
        it0, _ = backward_warp(i0, warp0)
        it1, _ = backward_warp(i1, warp1)
        return it0, it1, f0t, f1t

    def forward(
        self,
        i0: torch.Tensor,
        i1: torch.Tensor,
        t: float = 0.5,
        reconstruct_inputs: bool = True,
    ) -> InterpolationOutput:
        check_same_size("interpolate", i0, i1)
        for size in i0.shape[-2:]:
            if size % self.size_multiple != 0:
                raise ContractViolationError(ERROR_MESSAGES["not_divisible"].format(
                    what="interpolate", size=size, divisor=self.size_multiple))

        biflow = self.motion(i0, i1)
        f01_up = self.upsampler(biflow.f01, i0)
        f10_up = self.upsampler(biflow.f10, i1)
        it0, it1, f0t, f1t = self.warp_to_time(i0, i1, f01_up, f10_up, t)

        proxy = self.texture.predict_proxy(it0, it1)
        needs_textures = self.texture.cfg.enabled or reconstruct_inputs
        t0, t1 = self.texture.extract_textures(i0, i1) if needs_textures else (None, None)
        mapping = self.texture(proxy, t0, t1, f0t, f1t)

        return InterpolationOutput(
            frame=self.reconstruction(mapping.latent),
            i0_hat=self.reconstruction(t0) if reconstruct_inputs else None,
            i1_hat=self.reconstruction(t1) if reconstruct_inputs else None,
            biflow=biflow,
            f01_up=f01_up,
            f10_up=f10_up,
            warped0=it0,
            warped1=it1,
            texture=mapping,
        )
