"""
Image-quality metrics: PSNR, SSIM, edge-region variants, edge IoU and
pluggable external metrics.

Frames are (H, W, 3) arrays in [0, 1]. The edge mask comes from the
ground-truth frame: Canny edges dilated by a disk.
"""

from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
from skimage import color, feature, morphology
from skimage.metrics import structural_similarity

from schemas.evaluation import EvalConfig
from utils import get_logger
from utils.constants import ERROR_MESSAGES, PSNR_CAP_DB, SSIM_SIGMA, SSIM_WINDOW
from utils.exceptions import (
    ConfigurationError,
    ContractViolationError,
    UndefinedMetricError,
)

logger = get_logger(__name__)

MetricFn = Callable[[np.ndarray, np.ndarray], float]


def _check_pair(what: str, pred: np.ndarray, gt: np.ndarray) -> None:
    if pred.shape != gt.shape:
        raise ContractViolationError(ERROR_MESSAGES["size_mismatch"].format(
            what=what, left=pred.shape, right=gt.shape))


def psnr(pred: np.ndarray, gt: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """
    10 * log10(1 / MSE) over all or masked pixels, capped at 99 dB.

    Raises:
        UndefinedMetricError: The mask selects no pixel
    """
    _check_pair("psnr", pred, gt)
    sq = (np.asarray(pred, dtype=np.float64) - np.asarray(gt, dtype=np.float64)) ** 2
    if mask is not None:
        selected = np.asarray(mask, dtype=bool)
        if not selected.any():
            raise UndefinedMetricError(ERROR_MESSAGES["empty_mask"])
        sq = sq[selected]
    mse = float(sq.mean())
    if mse == 0.0:
        return PSNR_CAP_DB
    return float(min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB))


def ssim(pred: np.ndarray, gt: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """
    Single-scale SSIM (11x11 Gaussian window, sigma 1.5, data range 1)
    averaged over window centres at least 5 pixels from the border,
    restricted to the mask when given.

    Raises:
        ContractViolationError: Images smaller than the window
        UndefinedMetricError: The mask selects no window centre
    """
    _check_pair("ssim", pred, gt)
    height, width = gt.shape[:2]
    if height < SSIM_WINDOW or width < SSIM_WINDOW:
        raise ContractViolationError(ERROR_MESSAGES["image_too_small"].format(
            minimum=SSIM_WINDOW, height=height, width=width))

    _, ssim_map = structural_similarity(
        np.asarray(gt, dtype=np.float64),
        np.asarray(pred, dtype=np.float64),
        channel_axis=2 if gt.ndim == 3 else None,
        data_range=1.0,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        full=True,
    )
    if ssim_map.ndim == 3:
        ssim_map = ssim_map.mean(axis=2)

    selected = np.ones((height, width), dtype=bool) if mask is None else np.asarray(mask, dtype=bool).copy()
    pad = (SSIM_WINDOW - 1) // 2
    selected[:pad, :] = False
    selected[-pad:, :] = False
    selected[:, :pad] = False
    selected[:, -pad:] = False
    if not selected.any():
        raise UndefinedMetricError(ERROR_MESSAGES["empty_mask"])
    return float(ssim_map[selected].mean())


def canny_edges(image: np.ndarray, cfg: EvalConfig) -> np.ndarray:
    gray = color.rgb2gray(image) if image.ndim == 3 else image
    return feature.canny(
        gray,
        sigma=cfg.canny_sigma,
        low_threshold=cfg.canny_low,
        high_threshold=cfg.canny_high,
    )


def edge_mask(gt: np.ndarray, cfg: EvalConfig) -> np.ndarray:
    """Ground-truth Canny edges dilated by a disk of radius ``edge_dilation``."""
    edges = canny_edges(gt, cfg)
    if cfg.edge_dilation == 0:
        return edges
    return morphology.dilation(edges, morphology.disk(cfg.edge_dilation)).astype(bool)


def edge_iou(pred: np.ndarray, gt: np.ndarray, cfg: Optional[EvalConfig] = None) -> float:
    """|E_pred & E_gt| / |E_pred | E_gt|; 1.0 when both edge maps are empty."""
    _check_pair("edge_iou", pred, gt)
    cfg = cfg or EvalConfig()
    pred_edges = canny_edges(pred, cfg)
    gt_edges = canny_edges(gt, cfg)
    union = np.logical_or(pred_edges, gt_edges).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(pred_edges, gt_edges).sum() / union)


def overlay(i0: np.ndarray, i1: np.ndarray) -> np.ndarray:
    """Pixel average of the two inputs."""
    return ((np.asarray(i0, dtype=np.float64) + np.asarray(i1, dtype=np.float64)) / 2.0).astype(np.float32)


class MetricRegistry:
    """
    Named external metrics (e.g. perceptual distances living outside this package).

    Values from these plugins are reported as non-authoritative.
    """

    def __init__(self) -> None:
        self._metrics: Dict[str, MetricFn] = {}

    def register(self, name: str, fn: MetricFn) -> None:
        self._metrics[name] = fn
        logger.info("Metric plugin registered", extra={"extra_data": {"plugin": name}})

    def unregister(self, name: str) -> None:
        self._metrics.pop(name, None)

    def names(self) -> List[str]:
        return sorted(self._metrics)

    def evaluate(self, name: str, pred: np.ndarray, gt: np.ndarray) -> float:
        """
        Raises:
            ConfigurationError: No plugin registered under ``name``
        """
        if name not in self._metrics:
            raise ConfigurationError(ERROR_MESSAGES["unknown_metric_plugin"].format(name=name))
        return float(self._metrics[name](pred, gt))


_metric_registry: Optional[MetricRegistry] = None


def get_metric_registry() -> MetricRegistry:
    """Get or create the metric registry singleton."""
    global _metric_registry
    if _metric_registry is None:
        _metric_registry = MetricRegistry()
    return _metric_registry


def external_metric(pred: np.ndarray, gt: np.ndarray, plugin_name: str) -> float:
    return get_metric_registry().evaluate(plugin_name, pred, gt)


def evaluate_frame(
    pred: np.ndarray,
    gt: np.ndarray,
    cfg: EvalConfig,
    plugins: Iterable[str] = (),
) -> Dict[str, float]:
    """
    Every metric for one frame.

    Edge-region PSNR/SSIM are NaN when the ground truth has no edges.
    """
    mask = edge_mask(gt, cfg)
    row: Dict[str, float] = {
        "psnr": psnr(pred, gt),
        "ssim": ssim(pred, gt),
    }
    try:
        row["edge_psnr"] = psnr(pred, gt, mask)
        row["edge_ssim"] = ssim(pred, gt, mask)
    except UndefinedMetricError:
        row["edge_psnr"] = float("nan")
        row["edge_ssim"] = float("nan")
    row["edge_iou"] = edge_iou(pred, gt, cfg)
    for name in plugins:
        row[f"ext_{name}"] = external_metric(pred, gt, name)
    return row


def summarize(rows: List[Dict[str, float]]) -> Dict[str, float]:
    """Per-metric mean over rows, ignoring NaN entries."""
    summary: Dict[str, float] = {}
    if not rows:
        return summary
    for key, value in rows[0].items():
        if not isinstance(value, (int, float)):
            continue
        values = np.array([row[key] for row in rows], dtype=np.float64)
        finite = values[~np.isnan(values)]
        summary[key] = float(finite.mean()) if finite.size else float("nan")
    return summary
