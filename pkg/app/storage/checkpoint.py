"""
Checkpoint container.

Layout:
    4 bytes   magic "VTKR"
    uint32    format version
    uint64    header length N
    N bytes   UTF-8 JSON header: flat config echo, step, metadata and, per
              named section, its version and tensor table
    ...       raw little-endian tensor bytes, offsets relative to this point

The header is serialized with sorted keys so identical models and configs
give byte-identical files.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np
import torch
import torch.nn as nn

from schemas.run_config import RunConfig
from storage.atomic import atomic_write
from utils import get_logger
from utils.constants import (
    CHECKPOINT_FORMAT_VERSION,
    CHECKPOINT_MAGIC,
    CHECKPOINT_SECTION_VERSION,
    CHECKPOINT_SECTIONS,
    ERROR_MESSAGES,
)
from utils.exceptions import AppException, CheckpointError

logger = get_logger(__name__)

_PREAMBLE = struct.Struct("<4sIQ")

_DTYPES = {
    torch.float32: "<f4",
    torch.float64: "<f8",
    torch.float16: "<f2",
    torch.int64: "<i8",
    torch.int32: "<i4",
    torch.uint8: "|u1",
    torch.bool: "|b1",
}


@dataclass
class Checkpoint:
    """A decoded checkpoint."""

    config: RunConfig
    step: int
    sections: Dict[str, Dict[str, torch.Tensor]]
    meta: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(
    path: Union[str, Path],
    sections: Mapping[str, nn.Module],
    config: RunConfig,
    step: int = 0,
    meta: Optional[Dict[str, Any]] = None,
) -> None:
    """
    Atomically write a checkpoint.

    Args:
        path: Destination file
        sections: Named modules whose state dicts are stored
        config: Run configuration, echoed in full
        step: Training step
        meta: Extra JSON-serializable metadata
    """
    header_sections: Dict[str, Any] = {}
    chunks = []
    offset = 0
    for name, module in sections.items():
        tensors = []
        for key, tensor in module.state_dict().items():
            if tensor.dtype not in _DTYPES:
                raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(
                    path=path, detail=f"unsupported dtype {tensor.dtype} for {name}.{key}"))
            data = tensor.detach().cpu().contiguous().numpy().astype(_DTYPES[tensor.dtype]).tobytes()
            tensors.append({
                "name": key,
                "dtype": _DTYPES[tensor.dtype],
                "shape": list(tensor.shape),
                "offset": offset,
                "nbytes": len(data),
            })
            chunks.append(data)
            offset += len(data)
        header_sections[name] = {"version": CHECKPOINT_SECTION_VERSION, "tensors": tensors}

    header = {
        "config": config.flatten(),
        "step": step,
        "meta": meta or {},
        "sections": header_sections,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    with atomic_write(path) as handle:
        handle.write(_PREAMBLE.pack(CHECKPOINT_MAGIC, CHECKPOINT_FORMAT_VERSION, len(header_bytes)))
        handle.write(header_bytes)
        for chunk in chunks:
            handle.write(chunk)

    logger.info(
        "Checkpoint written",
        extra={"extra_data": {"path": str(path), "step": step, "bytes": offset}},
    )


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read and validate a checkpoint.

    Raises:
        CheckpointError: Missing file, bad magic, unsupported version or corrupt content
    """
    ckpt_path = Path(path)
    if not ckpt_path.is_file():
        raise CheckpointError(ERROR_MESSAGES["checkpoint_not_found"].format(path=path))
    raw = ckpt_path.read_bytes()

    if len(raw) < _PREAMBLE.size:
        raise CheckpointError(ERROR_MESSAGES["checkpoint_bad_magic"].format(path=path, magic=raw[:4]))
    magic, version, header_length = _PREAMBLE.unpack_from(raw, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(ERROR_MESSAGES["checkpoint_bad_magic"].format(path=path, magic=magic))
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(ERROR_MESSAGES["checkpoint_bad_version"].format(path=path, version=version))

    body_start = _PREAMBLE.size + header_length
    try:
        header = json.loads(raw[_PREAMBLE.size:body_start].decode("utf-8"))
        config = RunConfig.from_flat(header["config"])
        sections = {
            name: _decode_section(raw, body_start, name, section)
            for name, section in header["sections"].items()
        }
        step = int(header.get("step", 0))
    except CheckpointError:
        raise
    except (ValueError, KeyError, TypeError, AppException) as e:
        raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(path=path, detail=e))

    missing = [name for name in CHECKPOINT_SECTIONS if name not in sections]
    if missing:
        raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(
            path=path, detail=f"missing sections {missing}"))
    return Checkpoint(config=config, step=step, sections=sections, meta=header.get("meta", {}))


def _decode_section(raw: bytes, body_start: int, name: str, section: Dict[str, Any]) -> Dict[str, torch.Tensor]:
    if section["version"] != CHECKPOINT_SECTION_VERSION:
        raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(
            path=name, detail=f"unsupported section version {section['version']}"))
    state: Dict[str, torch.Tensor] = {}
    for entry in section["tensors"]:
        start = body_start + entry["offset"]
        end = start + entry["nbytes"]
        if end > len(raw):
            raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(
                path=name, detail=f"tensor {entry['name']} runs past the end of file"))
        array = np.frombuffer(raw[start:end], dtype=np.dtype(entry["dtype"])).reshape(entry["shape"])
        state[entry["name"]] = torch.from_numpy(array.copy())
    return state


def restore_sections(checkpoint: Checkpoint, sections: Mapping[str, nn.Module]) -> None:
    """
    Load checkpoint state into matching modules (strict).

    Raises:
        CheckpointError: A section is missing or its tensors do not fit the module
    """
    for name, module in sections.items():
        if name not in checkpoint.sections:
            raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(
                path=name, detail="section missing"))
        try:
            module.load_state_dict(checkpoint.sections[name], strict=True)
        except RuntimeError as e:
            raise CheckpointError(ERROR_MESSAGES["checkpoint_corrupt"].format(path=name, detail=e))
