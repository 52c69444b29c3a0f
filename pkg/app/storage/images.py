"""
PNG frame I/O and numpy <-> tensor conversion.

Frames are float32 (H, W, 3) arrays in [0, 1] on the host and (1, 3, H, W)
tensors on the model side. Files are written as 8-bit RGB PNG.
"""

import io
from pathlib import Path
from typing import Union

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from storage.atomic import atomic_write
from utils import get_logger
from utils.constants import ERROR_MESSAGES
from utils.exceptions import InputError

logger = get_logger(__name__)

_SIXTEEN_BIT_MODES = ("I;16", "I;16B", "I;16L", "I")


def read_png(path: Union[str, Path]) -> np.ndarray:
    """
    Read an image as a float32 (H, W, 3) array in [0, 1].

    16-bit images are down-converted to 8-bit precision with a warning;
    alpha is dropped and grayscale is replicated to three channels.

    Raises:
        InputError: Missing or unreadable file
    """
    image_path = Path(path)
    if not image_path.is_file():
        raise InputError(ERROR_MESSAGES["file_not_found"].format(path=path))
    try:
        with Image.open(image_path) as image:
            image.load()
            if image.mode in _SIXTEEN_BIT_MODES:
                logger.warning(
                    "16-bit image down-converted to 8-bit",
                    extra={"extra_data": {"path": str(image_path), "mode": image.mode}},
                )
                wide = np.asarray(image, dtype=np.float64) / 65535.0
                pixels = np.round(np.clip(wide, 0.0, 1.0) * 255.0).astype(np.uint8)
                pixels = np.repeat(pixels[..., None], 3, axis=2)
            else:
                pixels = np.asarray(image.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as e:
        raise InputError(ERROR_MESSAGES["image_unreadable"].format(path=path, detail=e))
    return pixels.astype(np.float32) / 255.0


def encode_png(frame: np.ndarray) -> bytes:
    """Quantize an (H, W, 3) or (H, W) frame in [0, 1] to 8-bit PNG bytes."""
    pixels = np.round(np.clip(np.asarray(frame, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)
    buffer = io.BytesIO()
    Image.fromarray(pixels).save(buffer, format="PNG")
    return buffer.getvalue()


def write_png(path: Union[str, Path], frame: np.ndarray) -> None:
    """Atomically write a frame in [0, 1] as 8-bit PNG."""
    data = encode_png(frame)
    with atomic_write(path) as handle:
        handle.write(data)


def frame_to_tensor(frame: np.ndarray, device: Union[str, torch.device] = "cpu") -> torch.Tensor:
    """(H, W, 3) array -> (1, 3, H, W) float32 tensor."""
    return torch.from_numpy(np.ascontiguousarray(frame, dtype=np.float32)).permute(2, 0, 1).unsqueeze(0).to(device)


def tensor_to_frame(tensor: torch.Tensor) -> np.ndarray:
    """(1, C, H, W) or (C, H, W) tensor -> (H, W, C) float32 array."""
    if tensor.dim() == 4:
        tensor = tensor[0]
    return tensor.detach().cpu().permute(1, 2, 0).numpy().astype(np.float32)
