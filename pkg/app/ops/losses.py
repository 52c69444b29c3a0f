"""
Training losses: Style (L1 + perceptual + Gram), Charbonnier, Census and the
multi-supervision mix over the interpolated and reconstructed input frames.
"""

from functools import partial
from typing import Callable, List, Optional

import torch
import torch.nn.functional as F

from ops.flow_core import check_same_size
from schemas.loss import LossConfig, LossVariant, LossWeights
from utils.constants import (
    CENSUS_PATCH_SIZE,
    CENSUS_SOFT_THRESHOLD,
    CHARBONNIER_EPSILON,
    ERROR_MESSAGES,
)
from utils.exceptions import ConfigurationError

PairLoss = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]

# ITU-R 601 luma, as used by common rgb-to-gray conversions
_GRAY_WEIGHTS = (0.2989, 0.5870, 0.1140)


def gram_matrix(features: torch.Tensor) -> torch.Tensor:
    """Channel x channel inner products normalized by the stage element count."""
    b, c, h, w = features.shape
    flat = features.reshape(b, c, h * w)
    return torch.bmm(flat, flat.transpose(1, 2)) / (c * h * w)


def style_loss(
    pred: torch.Tensor,
    target: torch.Tensor,
    weights: LossWeights,
    backbone: Optional[Callable[[torch.Tensor], List[torch.Tensor]]] = None,
) -> torch.Tensor:
    """
    w_l * L1 + w_vgg * L_VGG + w_gram * L_Gram.

    L_VGG and L_Gram are the mean over backbone stages of the MSE between
    features and between Gram matrices. The backbone is only run when one
    of those weights is nonzero.
    """
    check_same_size("style_loss", pred, target)
    loss = weights.w_l * (pred - target).abs().mean()
    if weights.w_vgg == 0 and weights.w_gram == 0:
        return loss

    pred_stages = backbone(pred)
    target_stages = backbone(target)
    feature_term = pred.new_zeros(())
    gram_term = pred.new_zeros(())
    for p, t in zip(pred_stages, target_stages):
        feature_term = feature_term + F.mse_loss(p, t)
        gram_term = gram_term + F.mse_loss(gram_matrix(p), gram_matrix(t))
    stages = len(pred_stages)
    return loss + weights.w_vgg * feature_term / stages + weights.w_gram * gram_term / stages


def charbonnier_loss(pred: torch.Tensor, target: torch.Tensor, eps: float = CHARBONNIER_EPSILON) -> torch.Tensor:
    """Mean of sqrt(diff^2 + eps^2)."""
    check_same_size("charbonnier_loss", pred, target)
    diff = pred - target
    return torch.sqrt(diff * diff + eps * eps).mean()


def rgb_to_gray(image: torch.Tensor) -> torch.Tensor:
    r, g, b = image[:, 0:1], image[:, 1:2], image[:, 2:3]
    return _GRAY_WEIGHTS[0] * r + _GRAY_WEIGHTS[1] * g + _GRAY_WEIGHTS[2] * b


def census_transform(image: torch.Tensor, patch_size: int = CENSUS_PATCH_SIZE) -> torch.Tensor:
    """
    Soft census signature: normalized neighbour-minus-centre differences of
    the 0..255 grayscale image, one channel per patch offset.
    """
    intensities = rgb_to_gray(image) * 255
    b, _, h, w = intensities.shape
    neighbors = F.unfold(intensities, kernel_size=patch_size, padding=patch_size // 2)
    neighbors = neighbors.reshape(b, patch_size * patch_size, h, w)
    diff = neighbors - intensities
    return diff / torch.sqrt(0.81 + diff * diff)


def census_distance_map(
    pred: torch.Tensor,
    target: torch.Tensor,
    patch_size: int = CENSUS_PATCH_SIZE,
) -> torch.Tensor:
    """Per-pixel soft hamming distance (B, 1, H, W); zero outside the valid interior."""
    check_same_size("census_loss", pred, target)
    a = census_transform(pred, patch_size)
    c = census_transform(target, patch_size)
    sq = (a - c) ** 2
    hamming = (sq / (CENSUS_SOFT_THRESHOLD + sq)).sum(dim=1, keepdim=True)
    return hamming * _interior_mask(hamming, patch_size // 2)


def census_loss(
    pred: torch.Tensor,
    target: torch.Tensor,
    patch_size: int = CENSUS_PATCH_SIZE,
    eps: float = CHARBONNIER_EPSILON,
) -> torch.Tensor:
    """Charbonnier-aggregated soft hamming distance over the valid interior."""
    hamming = census_distance_map(pred, target, patch_size)
    mask = _interior_mask(hamming, patch_size // 2)
    # shifted so identical signatures give exactly zero
    robust = (torch.sqrt(hamming * hamming + eps * eps) - eps) * mask
    return robust.sum() / mask.sum().clamp_min(1.0)


def _interior_mask(like: torch.Tensor, border: int) -> torch.Tensor:
    mask = torch.zeros_like(like)
    h, w = like.shape[-2:]
    if h > 2 * border and w > 2 * border:
        mask[..., border:h - border, border:w - border] = 1.0
    return mask


def l1_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    check_same_size("l1_loss", pred, target)
    return (pred - target).abs().mean()


def build_pair_loss(cfg: LossConfig, backbone=None) -> PairLoss:
    """Per-pair loss for the configured variant."""
    try:
        variant = LossVariant(cfg.variant)
    except ValueError:
        raise ConfigurationError(ERROR_MESSAGES["unknown_loss_variant"].format(variant=cfg.variant))

    if variant is LossVariant.STYLE:
        return partial(style_loss, weights=cfg.weights, backbone=backbone)
    if variant is LossVariant.L1:
        return l1_loss

    def charbonnier_census(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return (
            charbonnier_loss(pred, target, cfg.charbonnier_eps)
            + cfg.census_weight * census_loss(pred, target, eps=cfg.charbonnier_eps)
        )

    return charbonnier_census


def combined_loss(
    it_hat: torch.Tensor,
    i0_hat: Optional[torch.Tensor],
    i1_hat: Optional[torch.Tensor],
    it: torch.Tensor,
    i0: torch.Tensor,
    i1: torch.Tensor,
    weights: LossWeights,
    backbone=None,
    pair_loss: Optional[PairLoss] = None,
) -> torch.Tensor:
    """
    w_t * L(It_hat, It) + w_0 * L(I0_hat, I0) + w_1 * L(I1_hat, I1).

    Terms with zero weight are not evaluated, so the reconstructions may be
    None when (w_0, w_1) = (0, 0).
    """
    if pair_loss is None:
        pair_loss = partial(style_loss, weights=weights, backbone=backbone)

    total = it.new_zeros(())
    terms = ((weights.w_t, it_hat, it), (weights.w_0, i0_hat, i0), (weights.w_1, i1_hat, i1))
    for weight, pred, target in terms:
        if weight == 0:
            continue
        total = total + weight * pair_loss(pred, target)
    return total
