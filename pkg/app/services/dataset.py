"""
Triplet folders on disk: ``<root>/<sequence>/im1.png, im2.png, im3.png``.
"""

from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import torch
from torch.utils.data import Dataset

from storage.images import read_png
from utils import get_logger
from utils.constants import ERROR_MESSAGES, TRIPLET_FILENAMES
from utils.exceptions import InputError

logger = get_logger(__name__)


def find_triplets(root: Union[str, Path]) -> List[Path]:
    """
    Sorted directories under ``root`` holding all three triplet frames.

    Raises:
        InputError: Missing root or no triplet found
    """
    root_path = Path(root)
    if not root_path.is_dir():
        raise InputError(ERROR_MESSAGES["file_not_found"].format(path=root))
    folders = sorted(
        {p.parent for p in root_path.rglob(TRIPLET_FILENAMES[0])
         if all((p.parent / name).is_file() for name in TRIPLET_FILENAMES)}
    )
    if not folders:
        raise InputError(ERROR_MESSAGES["triplet_dir_empty"].format(path=root))
    return folders


def load_triplet_frames(folder: Path):
    """
    Read (I0, It, I1) from a triplet folder.

    Raises:
        InputError: Unreadable frame or frames of different sizes
    """
    frames = [read_png(folder / name) for name in TRIPLET_FILENAMES]
    for frame in frames[1:]:
        if frame.shape != frames[0].shape:
            raise InputError(ERROR_MESSAGES["frames_size_mismatch"].format(
                left=frames[0].shape, right=frame.shape))
    return frames


class TripletFolderDataset(Dataset):
    """
    Middle-frame triplets read from disk.

    Without ``draws`` item i is the i-th folder, uncropped. With ``draws``
    the dataset has that many items; each picks a random folder, random
    crop, horizontal flip and temporal reversal from an RNG keyed on
    (seed, i), so the stream does not depend on worker layout.
    """

    def __init__(
        self,
        root: Union[str, Path],
        crop_size: Optional[int] = None,
        augment: bool = False,
        seed: int = 0,
        draws: Optional[int] = None,
    ):
        self.root = Path(root)
        self.folders = find_triplets(root)
        self.crop_size = crop_size
        self.augment = augment
        self.seed = seed
        self.draws = draws
        logger.info(
            "Triplet folder indexed",
            extra={"extra_data": {"root": str(root), "triplets": len(self.folders)}},
        )

    def __len__(self) -> int:
        return self.draws if self.draws is not None else len(self.folders)

    def __getitem__(self, index: int) -> dict:
        rng = np.random.default_rng((self.seed, index))
        folder = self.folders[int(rng.integers(len(self.folders)))] if self.draws is not None else self.folders[index]
        i0, it, i1 = load_triplet_frames(folder)

        if self.crop_size is not None:
            height, width = i0.shape[:2]
            if height < self.crop_size or width < self.crop_size:
                raise InputError(ERROR_MESSAGES["crop_too_large"].format(
                    path=folder, height=height, width=width, crop=self.crop_size))
            top = int(rng.integers(0, height - self.crop_size + 1))
            left = int(rng.integers(0, width - self.crop_size + 1))
            window = (slice(top, top + self.crop_size), slice(left, left + self.crop_size))
            i0, it, i1 = i0[window], it[window], i1[window]

        if self.augment:
            if rng.random() < 0.5:
                i0, it, i1 = i0[:, ::-1], it[:, ::-1], i1[:, ::-1]
            if rng.random() < 0.5:
                i0, i1 = i1, i0

        def chw(array: np.ndarray) -> torch.Tensor:
            return torch.from_numpy(np.ascontiguousarray(array, dtype=np.float32)).permute(2, 0, 1)

        return {
            "i0": chw(i0),
            "it": chw(it),
            "i1": chw(i1),
            "t": torch.tensor(0.5, dtype=torch.float32),
            "name": folder.relative_to(self.root).as_posix(),
        }
