"""
Inference on host frames of any size.

Frames are edge-padded up to the model's size multiple, interpolated and
cropped back to the input size.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F

from config import get_settings
from models.interpolator import FrameInterpolator
from models.texture_mapping import MatchIndexMap
from schemas.run_config import RunConfig
from storage.checkpoint import load_checkpoint, restore_sections
from storage.images import frame_to_tensor, tensor_to_frame
from utils import get_logger, measure_time
from utils.constants import ERROR_MESSAGES
from utils.exceptions import InputError

logger = get_logger(__name__)


@dataclass
class InterpolationResult:
    """Host-side outputs cropped to the input size."""

    frame: np.ndarray
    f01_up: np.ndarray
    f10_up: np.ndarray
    matches: Optional[MatchIndexMap]
    i0_hat: Optional[np.ndarray] = None
    i1_hat: Optional[np.ndarray] = None


def pad_to_multiple(frame: torch.Tensor, multiple: int) -> Tuple[torch.Tensor, Tuple[int, int]]:
    """Replicate-pad right and bottom so both sides divide ``multiple``."""
    height, width = frame.shape[-2:]
    pad_h = (-height) % multiple
    pad_w = (-width) % multiple
    if pad_h or pad_w:
        frame = F.pad(frame, (0, pad_w, 0, pad_h), mode="replicate")
    return frame, (height, width)


class InterpolationService:
    """Wraps a frozen FrameInterpolator for single-pair inference."""

    def __init__(self, model: FrameInterpolator, config: RunConfig, device: Union[str, torch.device, None] = None):
        self.device = torch.device(device or get_settings().device)
        self.model = model.to(self.device).eval()
        self.config = config

    @classmethod
    def from_checkpoint(cls, path: Union[str, Path], device: Union[str, torch.device, None] = None) -> "InterpolationService":
        """
        Build the model described by a checkpoint and load its weights.

        Raises:
            CheckpointError: Unreadable or mismatched checkpoint
        """
        checkpoint = load_checkpoint(path)
        model = FrameInterpolator(checkpoint.config)
        restore_sections(checkpoint, model.sections())
        logger.info(
            "Model restored",
            extra={"extra_data": {"checkpoint": str(path), "step": checkpoint.step}},
        )
        return cls(model, checkpoint.config, device)

    @measure_time
    def interpolate(
        self,
        i0: np.ndarray,
        i1: np.ndarray,
        t: float = 0.5,
        reconstruct_inputs: bool = False,
    ) -> InterpolationResult:
        """
        Synthesize the frame at time t; optionally also decode the input textures.

        Raises:
            InputError: Frames differ in size
        """
        if i0.shape != i1.shape:
            raise InputError(ERROR_MESSAGES["frames_size_mismatch"].format(left=i0.shape, right=i1.shape))

        x0, (height, width) = pad_to_multiple(frame_to_tensor(i0, self.device), self.model.size_multiple)
        x1, _ = pad_to_multiple(frame_to_tensor(i1, self.device), self.model.size_multiple)
        with torch.no_grad():
            output = self.model(x0, x1, t=t, reconstruct_inputs=reconstruct_inputs)

        return InterpolationResult(
            frame=tensor_to_frame(output.frame[..., :height, :width]),
            f01_up=tensor_to_frame(output.f01_up[..., :height, :width]),
            f10_up=tensor_to_frame(output.f10_up[..., :height, :width]),
            matches=output.texture.matches,
            i0_hat=tensor_to_frame(output.i0_hat[..., :height, :width]) if reconstruct_inputs else None,
            i1_hat=tensor_to_frame(output.i1_hat[..., :height, :width]) if reconstruct_inputs else None,
        )
