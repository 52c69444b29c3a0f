"""Storage module: frame, flow and checkpoint files."""

from storage.atomic import atomic_write, write_all
from storage.checkpoint import Checkpoint, load_checkpoint, restore_sections, save_checkpoint
from storage.flo import encode_flo, read_flo, write_flo
from storage.images import encode_png, frame_to_tensor, read_png, tensor_to_frame, write_png

__all__ = [
    "atomic_write",
    "write_all",
    "Checkpoint",
    "load_checkpoint",
    "restore_sections",
    "save_checkpoint",
    "encode_flo",
    "read_flo",
    "write_flo",
    "encode_png",
    "frame_to_tensor",
    "read_png",
    "tensor_to_frame",
    "write_png",
]
