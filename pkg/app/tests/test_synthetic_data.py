"""
Tests for the synthetic sprite renderer and dataset.
"""

import numpy as np
import pytest
import torch

from ops.flow_core import backward_warp, invert_forward_flow
from schemas.training import TrainConfig
from services.synthetic_data import (
    SceneSpec,
    SpriteSpec,
    SyntheticTripletDataset,
    generate_synthetic_triplet,
    random_scene,
    random_texture,
    render_scene,
    triplet_to_sample,
)


@pytest.fixture
def flat_colors():
    background = np.broadcast_to(np.array([0.2, 0.3, 0.4]), (40, 40, 3)).copy()
    sprite = np.broadcast_to(np.array([0.9, 0.1, 0.5]), (10, 10, 3)).copy()
    return background, sprite


class TestRenderScene:
    """Test suite for analytic rendering and ground-truth flow."""

    def test_static_scene(self, rng):
        scene = SceneSpec(height=24, width=24, background=random_texture(rng, 24, 24))
        triplet = render_scene(scene)

        assert np.array_equal(triplet.i0, triplet.it)
        assert np.array_equal(triplet.i0, triplet.i1)
        assert np.all(triplet.gt_flow01 == 0)

    def test_background_translation(self, rng):
        """A (2, 0) background shift moves frame content two columns right."""
        scene = SceneSpec(
            height=24,
            width=24,
            background=random_texture(rng, 32, 32),
            background_motion=(2.0, 0.0),
        )
        triplet = render_scene(scene)

        assert np.allclose(triplet.i1[:, 2:], triplet.i0[:, :-2], atol=1e-6)
        assert np.allclose(triplet.it[:, 1:], triplet.i0[:, :-1], atol=1e-6)
        assert np.allclose(triplet.gt_flow01[..., 0], 2.0)
        assert np.allclose(triplet.gt_flow01[..., 1], 0.0)

    def test_ground_truth_flow_warps_onto_middle_frame(self, rng):
        """I0 moved along t * F_0->1 reproduces It wherever the warp stays inside."""
        scene = SceneSpec(
            height=24,
            width=24,
            background=random_texture(rng, 32, 32),
            background_motion=(2.0, 0.0),
        )
        triplet = render_scene(scene, t=0.5)
        i0 = torch.from_numpy(triplet.i0).permute(2, 0, 1)[None]
        it = torch.from_numpy(triplet.it).permute(2, 0, 1)[None]
        f0t = torch.from_numpy(triplet.gt_flow01).permute(2, 0, 1)[None] * triplet.t

        warped, valid = backward_warp(i0, invert_forward_flow(f0t))
        # the inversion finds no sample for the last column
        valid[..., -1] = 0
        error = ((warped - it).abs() * valid).sum() / (valid.sum() * 3)

        assert valid.sum() > 0
        assert error.item() <= 1e-3

    def test_sprite_flow_and_middle_position(self, flat_colors):
        background, texture = flat_colors
        sprite = SpriteSpec(center=(16.0, 16.0), radius=(4.0, 4.0), motion=(4.0, -2.0), texture=texture)
        scene = SceneSpec(height=32, width=32, background=background, sprites=[sprite])
        triplet = render_scene(scene, t=0.5)

        assert triplet.gt_flow01[16, 16].tolist() == pytest.approx([4.0, -2.0])
        assert triplet.gt_flow01[0, 0].tolist() == [0.0, 0.0]
        # column 21 is covered only once the sprite has moved two pixels right
        assert np.allclose(triplet.i0[15, 21], [0.2, 0.3, 0.4], atol=1e-6)
        assert np.allclose(triplet.it[15, 21], [0.9, 0.1, 0.5], atol=1e-6)

    def test_later_sprites_in_front(self, flat_colors):
        background, texture = flat_colors
        front_texture = np.zeros_like(texture)
        back = SpriteSpec(center=(16.0, 16.0), radius=(4.0, 4.0), motion=(0.0, 0.0), texture=texture)
        front = SpriteSpec(center=(16.0, 16.0), radius=(2.0, 2.0), motion=(3.0, 0.0), texture=front_texture)
        scene = SceneSpec(height=32, width=32, background=background, sprites=[back, front])
        triplet = render_scene(scene)

        assert np.allclose(triplet.i0[16, 16], 0.0)
        assert triplet.gt_flow01[16, 16].tolist() == pytest.approx([3.0, 0.0])
        assert triplet.gt_flow01[16, 19].tolist() == pytest.approx([0.0, 0.0])

    def test_rotation_flow(self, flat_colors):
        background, texture = flat_colors
        sprite = SpriteSpec(
            center=(16.0, 16.0), radius=(6.0, 6.0), motion=(0.0, 0.0), texture=texture, rotation=np.pi / 2
        )
        scene = SceneSpec(height=32, width=32, background=background, sprites=[sprite])
        flow = render_scene(scene).gt_flow01

        # a quarter turn maps the local offset (+2, 0) onto (0, +2)
        assert flow[16, 18].tolist() == pytest.approx([-2.0, 2.0], abs=1e-5)
        assert flow[16, 16].tolist() == pytest.approx([0.0, 0.0], abs=1e-5)


class TestRandomScenes:
    """Test suite for seeded random triplets."""

    def test_deterministic(self):
        first = generate_synthetic_triplet(3, size=32)
        second = generate_synthetic_triplet(3, size=32)

        assert np.array_equal(first.i0, second.i0)
        assert np.array_equal(first.it, second.it)
        assert np.array_equal(first.gt_flow01, second.gt_flow01)

    def test_seeds_differ(self):
        assert not np.array_equal(generate_synthetic_triplet(3, size=32).i0, generate_synthetic_triplet(4, size=32).i0)

    def test_ranges(self):
        triplet = generate_synthetic_triplet(9, size=32)

        for frame in (triplet.i0, triplet.it, triplet.i1):
            assert frame.shape == (32, 32, 3)
            assert frame.dtype == np.float32
            assert frame.min() >= 0.0
            assert frame.max() <= 1.0
        assert triplet.gt_flow01.shape == (32, 32, 2)
        assert triplet.t == 0.5

    def test_sharp_edges_use_flat_sprites(self):
        cfg = TrainConfig(sharp_edges=True, sprites_min=2, sprites_max=3)
        scene = random_scene(np.random.default_rng(0), 32, cfg)

        assert 2 <= len(scene.sprites) <= 3
        for sprite in scene.sprites:
            assert np.all(sprite.texture == sprite.texture[0, 0])

    def test_motion_bounded(self):
        cfg = TrainConfig(max_displacement=4.0, affine_probability=0.0)
        scene = random_scene(np.random.default_rng(1), 32, cfg)

        for sprite in scene.sprites:
            assert np.hypot(*sprite.motion) <= 4.0 + 1e-9
            assert sprite.scale == 1.0
            assert sprite.rotation == 0.0


class TestSyntheticTripletDataset:
    def test_items_keyed_by_seed(self):
        cfg = TrainConfig(max_displacement=4.0)
        dataset = SyntheticTripletDataset(length=3, base_seed=7, size=32, cfg=cfg)
        expected = triplet_to_sample(generate_synthetic_triplet(8, size=32, cfg=cfg))

        item = dataset[1]

        assert len(dataset) == 3
        assert item["i0"].shape == (3, 32, 32)
        assert item["flow01"].shape == (2, 32, 32)
        assert item["t"].item() == 0.5
        for key in ("i0", "it", "i1", "flow01"):
            assert torch.equal(item[key], expected[key])
