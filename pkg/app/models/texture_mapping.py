"""
Flow-guided block texture mapping.

Pipeline for one frame pair at time t:
    1. Proxy Q from the two warped frames (H/2 x W/2 x C).
    2. Textures T_0, T_1 from the input frames, split into overlapping
       s x s blocks with stride s/2.
    3. Block grids rearranged by the inverted, time-scaled forward flows.
    4. Index vectors for proxy tiles (stride s) and gathered texture blocks;
       each proxy tile picks the best block in an N x N window of either
       source.
    5. Winning blocks are placed on the proxy tiles (M) and fused:
       L = Q + FusionConv([Q | M]).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from ops.blocks import BlockGrid, assemble_blocks, flow_to_block_grid, split_blocks
from ops.flow_core import check_same_size, grid_gather_nearest, invert_forward_flow
from schemas.texture import MatchConfig
from utils.constants import ERROR_MESSAGES, NORM_EPSILON
from utils.exceptions import ContractViolationError

# proxy tiles (stride s) index the texture grid (stride s/2) at twice their position
PROXY_TO_TEXTURE_SCALE = 2


@dataclass
class MatchIndexMap:
    """
    Per proxy tile: chosen offset (dx, dy) on the texture grid, source e and score.

    Tile (x, y) takes block (scale*x + dx, scale*y + dy) of gathered grid e.
    """

    dx: torch.Tensor
    dy: torch.Tensor
    e: torch.Tensor
    score: torch.Tensor
    scale: int = 1


@dataclass
class TextureMappingResult:
    latent: torch.Tensor
    proxy: torch.Tensor
    mapped: Optional[torch.Tensor] = None
    matches: Optional[MatchIndexMap] = None


def _conv(in_channels: int, out_channels: int, stride: int = 1, padding_mode: str = "zeros") -> nn.Conv2d:
    return nn.Conv2d(in_channels, out_channels, 3, stride=stride, padding=1, padding_mode=padding_mode)


class ProxyPredictor(nn.Module):
    """Q = Convs(I_t^0 | I_t^1), stride-2 entry."""

    def __init__(self, channels: int):
        super().__init__()
        self.body = nn.Sequential(
            _conv(6, channels, stride=2), nn.LeakyReLU(0.1),
            _conv(channels, channels), nn.LeakyReLU(0.1),
            _conv(channels, channels), nn.LeakyReLU(0.1),
            _conv(channels, channels),
        )

    def forward(self, it0: torch.Tensor, it1: torch.Tensor) -> torch.Tensor:
        check_same_size("predict_proxy", it0, it1)
        return self.body(torch.cat([it0, it1], dim=1))


class TextureExtractor(nn.Module):
    """T = Convs(I), stride-2 entry, shared by both input frames."""

    def __init__(self, channels: int):
        super().__init__()
        self.body = nn.Sequential(
            _conv(3, channels, stride=2), nn.LeakyReLU(0.1),
            _conv(channels, channels), nn.LeakyReLU(0.1),
            _conv(channels, channels),
        )

    def forward(self, frame: torch.Tensor) -> torch.Tensor:
        return self.body(frame)


class IndexEncoder(nn.Module):
    """
    Block -> C' index vector: convs with one stride-2 stage, per-channel
    spatial standardization (Norm), then the spatial mean of its positive part.
    """

    def __init__(self, channels: int, index_channels: int):
        super().__init__()
        self.body = nn.Sequential(
            _conv(channels, index_channels, padding_mode="replicate"), nn.LeakyReLU(0.1),
            _conv(index_channels, index_channels, stride=2, padding_mode="replicate"),
        )

    def forward(self, grid: BlockGrid) -> torch.Tensor:
        b, gh, gw, c, s, _ = grid.blocks.shape
        keys = self.body(grid.blocks.reshape(b * gh * gw, c, s, s))
        var, mean = torch.var_mean(keys, dim=(2, 3), unbiased=False, keepdim=True)
        normed = (keys - mean) / torch.sqrt(var + NORM_EPSILON)
        # the plain mean of a standardized map is identically zero
        vectors = F.relu(normed).mean(dim=(2, 3))
        return vectors.reshape(b, gh, gw, -1)


class FusionConv(nn.Module):
    """Residual fusion of proxy and mapped texture; zero-initialized output."""

    def __init__(self, channels: int):
        super().__init__()
        self.body = nn.Sequential(
            _conv(2 * channels, channels), nn.LeakyReLU(0.1),
            _conv(channels, channels),
        )
        nn.init.zeros_(self.body[-1].weight)
        nn.init.zeros_(self.body[-1].bias)

    def forward(self, proxy: torch.Tensor, mapped: torch.Tensor) -> torch.Tensor:
        return proxy + self.body(torch.cat([proxy, mapped], dim=1))


def flow_guided_gather(
    blocks0: BlockGrid,
    blocks1: BlockGrid,
    f0t_block: torch.Tensor,
    f1t_block: torch.Tensor,
) -> Tuple[BlockGrid, BlockGrid]:
    """B_{e,t} = GridSample(B_e, -W(F_e->t, F_e->t), nearest)."""
    gathered0 = grid_gather_nearest(blocks0, invert_forward_flow(f0t_block))
    gathered1 = grid_gather_nearest(blocks1, invert_forward_flow(f1t_block))
    return gathered0, gathered1


def candidate_offsets(n: int) -> Tuple[Tuple[int, int, int], ...]:
    """(e, i, j) candidates in tie-break priority: e, then |i| + |j|, then row-major."""
    r = n // 2
    candidates = [(e, i, j) for e in (0, 1) for j in range(-r, r + 1) for i in range(-r, r + 1)]
    return tuple(sorted(candidates, key=lambda c: (c[0], abs(c[1]) + abs(c[2]), c[2], c[1])))


def candidate_scores(
    q: torch.Tensor,
    k0: torch.Tensor,
    k1: torch.Tensor,
    n: int,
    scale: int = 1,
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """
    Dot products of each proxy vector with every window candidate.

    Args:
        q: (B, gh, gw, C') proxy index vectors
        k0, k1: (B, kh, kw, C') texture index vectors
        n: Odd window side
        scale: Proxy-to-texture grid position ratio

    Returns:
        Scores (B, gh, gw, K) with -inf for out-of-grid candidates, and the
        flat source index (B, gh, gw, K) into the stacked [k0; k1] grids and
        the candidate validity mask
    """
    if n % 2 == 0:
        raise ContractViolationError(ERROR_MESSAGES["invalid_argument"].format(
            what="local_match", detail=f"window side must be odd, got {n}"))
    b, gh, gw, _ = q.shape
    kh, kw = k0.shape[1:3]
    if k1.shape != k0.shape:
        raise ContractViolationError(ERROR_MESSAGES["size_mismatch"].format(
            what="local_match", left=tuple(k0.shape), right=tuple(k1.shape)))

    keys = torch.cat([k0.reshape(b, kh * kw, -1), k1.reshape(b, kh * kw, -1)], dim=1)
    rows = torch.arange(gh, device=q.device).view(gh, 1) * scale
    cols = torch.arange(gw, device=q.device).view(1, gw) * scale

    scores, indices, valids = [], [], []
    for e, i, j in candidate_offsets(n):
        tx = cols + i
        ty = rows + j
        valid = (tx >= 0) & (tx < kw) & (ty >= 0) & (ty < kh)
        index = e * kh * kw + ty.clamp(0, kh - 1) * kw + tx.clamp(0, kw - 1)
        index = index.expand(gh, gw)
        picked = keys[:, index.reshape(-1)].reshape(b, gh, gw, -1)
        score = (q * picked).sum(dim=-1)
        scores.append(score.masked_fill(~valid.expand(gh, gw), float("-inf")))
        indices.append(index)
        valids.append(valid.expand(gh, gw))
    return (
        torch.stack(scores, dim=-1),
        torch.stack(indices, dim=-1).expand(b, gh, gw, -1),
        torch.stack(valids, dim=-1).expand(b, gh, gw, -1),
    )


def local_match(
    q: torch.Tensor,
    k0: torch.Tensor,
    k1: torch.Tensor,
    n: int,
    scale: int = 1,
) -> MatchIndexMap:
    """
    Hard argmax over the N x N windows of both sources.

    Proxy position (x, y) searches around (scale*x, scale*y) of the texture
    grids; out-of-grid candidates are excluded. Ties go to e = 0, then the
    smaller |dx| + |dy|, then row-major order.
    """
    scores, _, _ = candidate_scores(q, k0, k1, n, scale)
    # argmax returns the first maximum, and candidates are in priority order
    best = scores.argmax(dim=-1)
    offsets = torch.tensor(candidate_offsets(n), device=q.device)
    chosen = offsets[best]
    return MatchIndexMap(
        dx=chosen[..., 1],
        dy=chosen[..., 2],
        e=chosen[..., 0],
        score=scores.gather(-1, best.unsqueeze(-1)).squeeze(-1),
        scale=scale,
    )


def map_textures(
    proxy: torch.Tensor,
    matches: MatchIndexMap,
    gathered0: BlockGrid,
    gathered1: BlockGrid,
    s: int,
) -> torch.Tensor:
    """
    Mapped texture M: each s x s proxy tile replaced by its winning block.

    Raises:
        ContractViolationError: A match points outside the texture grid
    """
    b, c, h, w = proxy.shape
    gh, gw = h // s, w // s
    kh, kw = gathered0.grid_h, gathered0.grid_w
    rows = torch.arange(gh, device=proxy.device).view(1, gh, 1) * matches.scale
    cols = torch.arange(gw, device=proxy.device).view(1, 1, gw) * matches.scale
    src_x = cols + matches.dx
    src_y = rows + matches.dy

    outside = (src_x < 0) | (src_x >= kw) | (src_y < 0) | (src_y >= kh)
    if bool(outside.any()):
        where = outside.nonzero()[0]
        raise ContractViolationError(ERROR_MESSAGES["match_out_of_grid"].format(
            x=int(src_x[tuple(where)]), y=int(src_y[tuple(where)]), h=kh, w=kw))

    stacked = torch.cat([gathered0.flat(), gathered1.flat()], dim=1)
    index = matches.e * kh * kw + src_y * kw + src_x
    index = index.reshape(b, gh * gw, 1).expand(-1, -1, stacked.shape[-1])
    placed = stacked.gather(1, index).reshape(b, gh, gw, c, s, s)
    return assemble_blocks(BlockGrid(blocks=placed, stride=s, s=s))


def map_textures_soft(
    proxy: torch.Tensor,
    scores: torch.Tensor,
    indices: torch.Tensor,
    gathered0: BlockGrid,
    gathered1: BlockGrid,
    s: int,
    temperature: float,
) -> torch.Tensor:
    """Softmax-weighted blend of all window candidates per proxy tile."""
    b, c, h, w = proxy.shape
    gh, gw = h // s, w // s
    weights = torch.softmax(scores / temperature, dim=-1)
    stacked = torch.cat([gathered0.flat(), gathered1.flat()], dim=1)
    blended = proxy.new_zeros((b, gh * gw, stacked.shape[-1]))
    for k in range(scores.shape[-1]):
        index = indices[..., k].reshape(b, gh * gw, 1).expand(-1, -1, stacked.shape[-1])
        blended = blended + weights[..., k].reshape(b, gh * gw, 1) * stacked.gather(1, index)
    return assemble_blocks(BlockGrid(blocks=blended.reshape(b, gh, gw, c, s, s), stride=s, s=s))


class TextureMapper(nn.Module):
    """Proxy prediction, texture extraction, block search and mapping."""

    def __init__(self, cfg: MatchConfig):
        super().__init__()
        self.cfg = cfg
        self.proxy_predictor = ProxyPredictor(cfg.C)
        self.extractor = TextureExtractor(cfg.C)
        self.index_encoder = IndexEncoder(cfg.C, cfg.Cprime)
        self.fusion = FusionConv(cfg.C)

    def predict_proxy(self, it0: torch.Tensor, it1: torch.Tensor) -> torch.Tensor:
        return self.proxy_predictor(it0, it1)

    def extract_textures(self, i0: torch.Tensor, i1: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        check_same_size("extract_textures", i0, i1)
        return self.extractor(i0), self.extractor(i1)

    def forward(
        self,
        proxy: torch.Tensor,
        t0: torch.Tensor,
        t1: torch.Tensor,
        f0t_up: torch.Tensor,
        f1t_up: torch.Tensor,
    ) -> TextureMappingResult:
        """
        Map texture blocks onto the proxy.

        Args:
            proxy: Q at (H/2, W/2)
            t0, t1: Textures at (H/2, W/2)
            f0t_up, f1t_up: Time-scaled forward flows at full resolution

        Returns:
            TextureMappingResult with the fused latent L
        """
        if not self.cfg.enabled:
            return TextureMappingResult(latent=proxy, proxy=proxy)

        s = self.cfg.s
        stride = self.cfg.texture_stride
        for size in proxy.shape[-2:]:
            if size % s != 0:
                raise ContractViolationError(ERROR_MESSAGES["not_divisible"].format(
                    what="map_textures", size=size, divisor=s))

        # full resolution -> texture resolution -> texture block grid
        f0t_block = flow_to_block_grid(flow_to_block_grid(f0t_up, 2), stride)
        f1t_block = flow_to_block_grid(flow_to_block_grid(f1t_up, 2), stride)
        gathered0, gathered1 = flow_guided_gather(
            split_blocks(t0, s, stride),
            split_blocks(t1, s, stride),
            f0t_block,
            f1t_block,
        )

        q = self.index_encoder(split_blocks(proxy, s, s))
        k0 = self.index_encoder(gathered0)
        k1 = self.index_encoder(gathered1)

        if self.cfg.soft_match:
            scores, indices, _ = candidate_scores(q, k0, k1, self.cfg.N, PROXY_TO_TEXTURE_SCALE)
            mapped = map_textures_soft(
                proxy, scores, indices, gathered0, gathered1, s, self.cfg.match_temperature
            )
            matches = local_match(q, k0, k1, self.cfg.N, PROXY_TO_TEXTURE_SCALE)
        else:
            matches = local_match(q, k0, k1, self.cfg.N, PROXY_TO_TEXTURE_SCALE)
            mapped = map_textures(proxy, matches, gathered0, gathered1, s)

        latent = self.fusion(proxy, mapped)
        return TextureMappingResult(latent=latent, proxy=proxy, mapped=mapped, matches=matches)
