"""
Tests for block matching, texture mapping and the texture mapper module.
"""

import numpy as np
import pytest
import torch
from torch import nn

from models.texture_mapping import (
    FusionConv,
    IndexEncoder,
    MatchIndexMap,
    TextureMapper,
    candidate_offsets,
    local_match,
    map_textures,
)
from ops.blocks import split_blocks
from schemas.texture import MatchConfig
from utils.exceptions import ContractViolationError


def brute_force_match(q: np.ndarray, k0: np.ndarray, k1: np.ndarray, n: int, scale: int):
    """Straight loop over every window candidate, keeping the first strict maximum."""
    _, gh, gw, _ = q.shape
    kh, kw = k0.shape[1:3]
    keys = (k0, k1)
    result = np.zeros((gh, gw, 3), dtype=np.int64)
    for y in range(gh):
        for x in range(gw):
            best, best_score = None, -np.inf
            for e, i, j in candidate_offsets(n):
                tx, ty = scale * x + i, scale * y + j
                if not (0 <= tx < kw and 0 <= ty < kh):
                    continue
                score = float(np.dot(q[0, y, x], keys[e][0, ty, tx]))
                if score > best_score:
                    best, best_score = (i, j, e), score
            result[y, x] = best
    return result


class TestCandidateOffsets:
    def test_priority_order(self):
        """Source 0 first, then the centre, then the 4-neighbourhood in row-major order."""
        offsets = candidate_offsets(3)

        assert len(offsets) == 18
        assert offsets[:5] == ((0, 0, 0), (0, 0, -1), (0, -1, 0), (0, 1, 0), (0, 0, 1))
        assert offsets[9] == (1, 0, 0)

    def test_window_one(self):
        assert candidate_offsets(1) == ((0, 0, 0), (1, 0, 0))


class TestLocalMatch:
    """Test suite for local_match."""

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_brute_force(self, seed):
        """Identical (dx, dy, e) to an exhaustive search, tie-breaks included."""
        rng = np.random.default_rng(seed)
        n = int(rng.choice([1, 3, 5]))
        scale = int(rng.choice([1, 2]))
        # texture grids stay within 8x8
        limit = 8 // scale
        gh, gw = (int(v) for v in rng.integers(1, limit + 1, size=2))
        channels = 4
        q = rng.normal(size=(1, gh, gw, channels))
        k0 = rng.normal(size=(1, gh * scale, gw * scale, channels))
        k1 = rng.normal(size=(1, gh * scale, gw * scale, channels))
        if seed % 4 == 0:
            # quantized vectors produce exact ties
            q, k0, k1 = np.round(q), np.round(k0), np.round(k1)

        matches = local_match(torch.from_numpy(q), torch.from_numpy(k0), torch.from_numpy(k1), n, scale)
        expected = brute_force_match(q, k0, k1, n, scale)

        assert np.array_equal(matches.dx[0].numpy(), expected[..., 0])
        assert np.array_equal(matches.dy[0].numpy(), expected[..., 1])
        assert np.array_equal(matches.e[0].numpy(), expected[..., 2])

    def test_all_ties_pick_centre_of_source_zero(self):
        q = torch.zeros(1, 3, 3, 2)
        k = torch.zeros(1, 3, 3, 2)
        matches = local_match(q, k, k, 3)

        assert torch.all(matches.dx == 0)
        assert torch.all(matches.dy == 0)
        assert torch.all(matches.e == 0)

    def test_equal_sources_prefer_zero(self, torch_generator):
        q = torch.randn(1, 4, 4, 3, generator=torch_generator)
        k = torch.randn(1, 4, 4, 3, generator=torch_generator)
        assert torch.all(local_match(q, k, k.clone(), 3).e == 0)

    def test_stronger_source_one(self):
        q = torch.ones(1, 2, 2, 2)
        matches = local_match(q, torch.zeros(1, 2, 2, 2), torch.ones(1, 2, 2, 2), 1)
        assert torch.all(matches.e == 1)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_stay_in_grid(self, seed):
        generator = torch.Generator().manual_seed(seed)
        q = torch.randn(2, 5, 3, 4, generator=generator)
        k0 = torch.randn(2, 5, 3, 4, generator=generator)
        k1 = torch.randn(2, 5, 3, 4, generator=generator)
        matches = local_match(q, k0, k1, 5)

        cols = torch.arange(3).view(1, 1, 3)
        rows = torch.arange(5).view(1, 5, 1)
        assert torch.all((cols + matches.dx >= 0) & (cols + matches.dx < 3))
        assert torch.all((rows + matches.dy >= 0) & (rows + matches.dy < 5))

    @pytest.mark.parametrize("factor", [0.5, 4.0])
    def test_positive_scaling_keeps_matches(self, torch_generator, factor):
        q = torch.randn(1, 4, 4, 3, generator=torch_generator)
        k0 = torch.randn(1, 4, 4, 3, generator=torch_generator)
        k1 = torch.randn(1, 4, 4, 3, generator=torch_generator)
        plain = local_match(q, k0, k1, 3)
        scaled = local_match(q * factor, k0 * factor, k1 * factor, 3)

        assert torch.equal(plain.dx, scaled.dx)
        assert torch.equal(plain.dy, scaled.dy)
        assert torch.equal(plain.e, scaled.e)

    def test_even_window(self):
        with pytest.raises(ContractViolationError):
            local_match(torch.zeros(1, 2, 2, 2), torch.zeros(1, 2, 2, 2), torch.zeros(1, 2, 2, 2), 2)


class TestMapTextures:
    """Test suite for map_textures."""

    @pytest.mark.parametrize("seed", range(5))
    def test_tiles_are_single_source(self, seed):
        """Every mapped tile is bit-identical to the block its match points at."""
        generator = torch.Generator().manual_seed(seed)
        s, channels = 4, 3
        proxy = torch.zeros(1, channels, 8, 8)
        g0 = split_blocks(torch.rand(1, channels, 8, 8, generator=generator), s, s // 2)
        g1 = split_blocks(torch.rand(1, channels, 8, 8, generator=generator), s, s // 2)
        q = torch.randn(1, 2, 2, 5, generator=generator)
        k0 = torch.randn(1, 4, 4, 5, generator=generator)
        k1 = torch.randn(1, 4, 4, 5, generator=generator)
        matches = local_match(q, k0, k1, 3, scale=2)
        mapped = map_textures(proxy, matches, g0, g1, s)

        for y in range(2):
            for x in range(2):
                source = (g0, g1)[int(matches.e[0, y, x])]
                bx = 2 * x + int(matches.dx[0, y, x])
                by = 2 * y + int(matches.dy[0, y, x])
                tile = mapped[0, :, y * s:(y + 1) * s, x * s:(x + 1) * s]
                assert torch.equal(tile, source.blocks[0, by, bx])

    def test_out_of_grid_match(self):
        g = split_blocks(torch.zeros(1, 1, 8, 8), 4, 4)
        bad = MatchIndexMap(
            dx=torch.full((1, 2, 2), -1),
            dy=torch.zeros(1, 2, 2, dtype=torch.long),
            e=torch.zeros(1, 2, 2, dtype=torch.long),
            score=torch.zeros(1, 2, 2),
        )
        with pytest.raises(ContractViolationError):
            map_textures(torch.zeros(1, 1, 8, 8), bad, g, g, 4)


class TestIndexEncoder:
    def test_constant_block_gives_zero_vector(self):
        torch.manual_seed(0)
        encoder = IndexEncoder(3, 4).double()
        grid = split_blocks(torch.full((1, 3, 8, 8), 0.3, dtype=torch.float64), 4, 4)
        with torch.no_grad():
            vectors = encoder(grid)

        assert vectors.shape == (1, 2, 2, 4)
        assert torch.allclose(vectors, torch.zeros_like(vectors), atol=1e-12)


class TestFusionConv:
    def test_starts_as_identity_on_proxy(self, torch_generator):
        fusion = FusionConv(4)
        proxy = torch.randn(1, 4, 8, 8, generator=torch_generator)
        mapped = torch.randn(1, 4, 8, 8, generator=torch_generator)
        with torch.no_grad():
            assert torch.equal(fusion(proxy, mapped), proxy)

    def test_gradcheck(self):
        torch.manual_seed(3)
        fusion = FusionConv(2).double()
        nn.init.normal_(fusion.body[-1].weight, std=0.1)
        proxy = torch.randn(1, 2, 6, 6, dtype=torch.float64, requires_grad=True)
        mapped = torch.randn(1, 2, 6, 6, dtype=torch.float64, requires_grad=True)

        assert torch.autograd.gradcheck(fusion, (proxy, mapped), eps=1e-6, atol=1e-5, rtol=1e-3)


class TestTextureMapper:
    """Test suite for TextureMapper."""

    @pytest.fixture
    def mapper_inputs(self, torch_generator):
        proxy = torch.randn(1, 8, 16, 16, generator=torch_generator)
        t0 = torch.randn(1, 8, 16, 16, generator=torch_generator)
        t1 = torch.randn(1, 8, 16, 16, generator=torch_generator)
        flow = torch.zeros(1, 2, 32, 32)
        return proxy, t0, t1, flow

    def test_mapped_blocks_come_from_one_texture(self, mapper_inputs):
        """Exhaustive membership: each mapped tile is a block of T_0 or T_1."""
        torch.manual_seed(0)
        mapper = TextureMapper(MatchConfig(s=4, N=3, C=8, Cprime=4))
        proxy, t0, t1, flow = mapper_inputs
        with torch.no_grad():
            result = mapper(proxy, t0, t1, flow, flow)

        assert result.latent.shape == proxy.shape
        assert torch.equal(result.latent, proxy)
        candidates = torch.cat([split_blocks(t0, 4, 2).flat()[0], split_blocks(t1, 4, 2).flat()[0]])
        for y in range(4):
            for x in range(4):
                tile = result.mapped[0, :, 4 * y:4 * y + 4, 4 * x:4 * x + 4].reshape(-1)
                assert (candidates == tile).all(dim=1).any()

    def test_disabled_bypasses_matching(self, mapper_inputs):
        mapper = TextureMapper(MatchConfig(s=4, N=3, C=8, Cprime=4, enabled=False))
        proxy, _, _, _ = mapper_inputs
        result = mapper(proxy, None, None, None, None)

        assert result.latent is proxy
        assert result.matches is None

    def test_soft_match(self, mapper_inputs):
        torch.manual_seed(0)
        mapper = TextureMapper(MatchConfig(s=4, N=3, C=8, Cprime=4, soft_match=True))
        proxy, t0, t1, flow = mapper_inputs
        with torch.no_grad():
            result = mapper(proxy, t0, t1, flow, flow)

        assert result.mapped.shape == proxy.shape
        assert torch.isfinite(result.mapped).all()
        assert result.matches is not None

    def test_gradients_reach_textures_and_proxy(self, mapper_inputs):
        torch.manual_seed(0)
        mapper = TextureMapper(MatchConfig(s=4, N=3, C=8, Cprime=4))
        nn.init.normal_(mapper.fusion.body[-1].weight, std=0.1)
        proxy, t0, t1, flow = (tensor.clone().requires_grad_() for tensor in mapper_inputs)

        mapper(proxy, t0, t1, flow, flow).latent.sum().backward()

        texture_grad = sum(float(t.grad.abs().sum()) for t in (t0, t1) if t.grad is not None)
        assert texture_grad > 0
        assert float(proxy.grad.abs().sum()) > 0

    def test_swapped_frames_swap_textures(self, torch_generator):
        torch.manual_seed(0)
        mapper = TextureMapper(MatchConfig(s=4, N=3, C=8, Cprime=4))
        i0 = torch.rand(1, 3, 32, 32, generator=torch_generator)
        i1 = torch.rand(1, 3, 32, 32, generator=torch_generator)
        with torch.no_grad():
            t0, t1 = mapper.extract_textures(i0, i1)
            s0, s1 = mapper.extract_textures(i1, i0)

        assert torch.equal(t0, s1)
        assert torch.equal(t1, s0)

    def test_proxy_not_divisible(self):
        mapper = TextureMapper(MatchConfig(s=8, N=3, C=8, Cprime=4))
        proxy = torch.zeros(1, 8, 12, 12)
        flow = torch.zeros(1, 2, 24, 24)
        with pytest.raises(ContractViolationError):
            mapper(proxy, proxy, proxy, flow, flow)
