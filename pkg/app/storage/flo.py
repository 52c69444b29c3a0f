"""
Middlebury .flo codec.

Layout (little-endian): float32 magic 202021.25, int32 width, int32 height,
then height * width interleaved float32 (u, v) pairs in row-major order.
"""

from pathlib import Path
from typing import Union

import numpy as np

from storage.atomic import atomic_write
from utils.constants import ERROR_MESSAGES, FLO_MAGIC
from utils.exceptions import FlowFormatError, InputError

_FLOAT = np.dtype("<f4")
_INT = np.dtype("<i4")


def encode_flo(flow: np.ndarray) -> bytes:
    """
    Serialize an (H, W, 2) flow field.

    Raises:
        FlowFormatError: The array is not (H, W, 2)
    """
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise FlowFormatError(ERROR_MESSAGES["invalid_argument"].format(
            what="write_flo", detail=f"expected an (H, W, 2) array, got {flow.shape}"))
    height, width = flow.shape[:2]
    return b"".join((
        np.array([FLO_MAGIC], dtype=_FLOAT).tobytes(),
        np.array([width, height], dtype=_INT).tobytes(),
        np.ascontiguousarray(flow, dtype=_FLOAT).tobytes(),
    ))


def write_flo(path: Union[str, Path], flow: np.ndarray) -> None:
    data = encode_flo(flow)
    with atomic_write(path) as handle:
        handle.write(data)


def read_flo(path: Union[str, Path]) -> np.ndarray:
    """
    Read a .flo file into an (H, W, 2) float32 array.

    Raises:
        InputError: The file does not exist
        FlowFormatError: Bad magic or truncated payload
    """
    flo_path = Path(path)
    if not flo_path.is_file():
        raise InputError(ERROR_MESSAGES["file_not_found"].format(path=path))

    with open(flo_path, "rb") as handle:
        magic = np.fromfile(handle, _FLOAT, count=1)
        if magic.size != 1 or magic[0] != np.float32(FLO_MAGIC):
            raise FlowFormatError(ERROR_MESSAGES["flo_bad_magic"].format(
                path=path, magic=magic[0] if magic.size else None))
        dims = np.fromfile(handle, _INT, count=2)
        if dims.size != 2 or dims.min() < 0:
            raise FlowFormatError(ERROR_MESSAGES["flo_truncated"].format(
                path=path, expected=2, actual=dims.size))
        width, height = int(dims[0]), int(dims[1])
        expected = 2 * width * height
        data = np.fromfile(handle, _FLOAT, count=expected)

    if data.size != expected:
        raise FlowFormatError(ERROR_MESSAGES["flo_truncated"].format(
            path=path, expected=expected, actual=data.size))
    return data.reshape(height, width, 2).astype(np.float32)
