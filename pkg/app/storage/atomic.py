"""
Atomic file writes: data goes to a temporary sibling file that replaces the
destination only once it is complete.
"""

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import BinaryIO, Iterator, List, Mapping, Tuple, Union

from utils import get_logger

logger = get_logger(__name__)


@contextmanager
def atomic_write(path: Union[str, Path]) -> Iterator[BinaryIO]:
    """
    Open a binary handle whose contents appear at ``path`` on success.

    On any exception the temporary file is removed and the destination is
    left untouched.

    Usage:
        with atomic_write("out.png") as handle:
            handle.write(data)
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            yield handle
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        logger.warning(
            "Discarded partial write",
            extra={"extra_data": {"path": str(target)}},
        )
        raise


def write_all(payloads: Mapping[Union[str, Path], bytes]) -> None:
    """
    Write several files so that either all of them appear or none does.

    Every payload is first written to a temporary sibling; the renames only
    start once all of them are on disk. Directories created for a failed
    batch are removed again.
    """
    staged: List[Tuple[str, Path]] = []
    created: List[Path] = []
    try:
        for path, data in payloads.items():
            target = Path(path)
            if target.is_dir():
                raise IsADirectoryError(f"cannot write file over directory {target}")
            missing = [p for p in (target.parent, *target.parent.parents) if not p.exists()]
            target.parent.mkdir(parents=True, exist_ok=True)
            created.extend(reversed(missing))
            fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
            staged.append((tmp_name, target))
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
                handle.flush()
                os.fsync(handle.fileno())
    except BaseException:
        for tmp_name, _ in staged:
            try:
                os.unlink(tmp_name)
            except FileNotFoundError:
                pass
        for directory in reversed(created):
            try:
                directory.rmdir()
            except OSError:
                pass
        logger.warning(
            "Discarded partial batch",
            extra={"extra_data": {"paths": [str(p) for p in payloads]}},
        )
        raise

    for tmp_name, target in staged:
        os.replace(tmp_name, target)
