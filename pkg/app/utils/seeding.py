"""
Reproducibility switches for torch and numpy.
"""

import random

import numpy as np
import torch

from utils.log_config import get_logger

logger = get_logger(__name__)


def seed_everything(seed: int, deterministic: bool = True, num_threads: int = 1) -> torch.Generator:
    """
    Seed every RNG and, when requested, force deterministic kernels.

    Args:
        seed: Global seed
        deterministic: Enable torch's deterministic algorithms
        num_threads: Intra-op thread count (1 gives bit-reproducible CPU runs)

    Returns:
        A torch.Generator seeded with ``seed``
    """
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
    if num_threads > 0:
        torch.set_num_threads(num_threads)
    if deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)
        torch.backends.cudnn.benchmark = False
    logger.debug(
        "Seeded RNGs",
        extra={"extra_data": {"seed": seed, "deterministic": deterministic, "num_threads": num_threads}},
    )
    return torch.Generator().manual_seed(seed)
