"""
End-to-end properties of the pipeline on synthetic data.

The desk-scale training experiments are marked ``slow``; run them with
``pytest -m slow``.
"""

import numpy as np
import pytest
import torch

from models.interpolator import FrameInterpolator
from ops.blocks import split_blocks
from schemas import FrameWarpMode, MatchConfig, RunConfig, UpsamplerConfig
from services.benchmark_service import evaluate_model, iter_eval_triplets, write_rows_csv
from services.evaluation_service import psnr
from services.interpolation_service import InterpolationService
from services.synthetic_data import SceneSpec, generate_synthetic_triplet, random_texture, render_scene
from services.training_service import Trainer
from storage.images import frame_to_tensor


class TestSingleSourceTextures:
    """Every mapped block is bit-identical to a block of T_0 or T_1."""

    def test_evaluation_triplets(self, config_builder):
        config = config_builder(texture=MatchConfig(s=8, N=3, C=8, Cprime=4))
        torch.manual_seed(0)
        model = FrameInterpolator(config).eval()

        for seed in range(20):
            triplet = generate_synthetic_triplet(seed, size=32, cfg=config.train)
            i0, i1 = frame_to_tensor(triplet.i0), frame_to_tensor(triplet.i1)
            with torch.no_grad():
                output = model(i0, i1, reconstruct_inputs=False)
                t0, t1 = model.texture.extract_textures(i0, i1)

            candidates = torch.cat([split_blocks(t0, 8, 4).flat()[0], split_blocks(t1, 8, 4).flat()[0]])
            mapped = output.texture.mapped[0]
            rows, cols = mapped.shape[1] // 8, mapped.shape[2] // 8
            for y in range(rows):
                for x in range(cols):
                    tile = mapped[:, 8 * y:8 * y + 8, 8 * x:8 * x + 8].reshape(-1)
                    assert (candidates == tile).all(dim=1).any(), f"seed {seed} tile ({x}, {y})"


def desk_config(seed: int = 0, backend: str = "gfu") -> RunConfig:
    config = RunConfig()
    return config.model_copy(update={
        "upsampler": UpsamplerConfig(backend=backend),
        "train": config.train.model_copy(update={"seed": seed}),
    })


def sharp_edge_suite(config: RunConfig) -> RunConfig:
    return config.model_copy(update={"train": config.train.model_copy(update={"sharp_edges": True})})


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    """One desk-scale GFU training run plus its held-out evaluation."""
    config = desk_config()
    final = Trainer(config, tmp_path_factory.mktemp("desk")).fit()
    service = InterpolationService.from_checkpoint(final)
    return final, evaluate_model(service, iter_eval_triplets(config), config)


@pytest.mark.slow
class TestDeskScaleTraining:
    """Directional checks after a full desk-scale run."""

    def test_beats_overlay_baseline(self, desk_run):
        _, report = desk_run
        assert len(report.rows) == 50
        assert report.summary["psnr"] >= report.overlay_summary["psnr"] + 2.0

    def test_input_reconstruction(self, desk_run):
        _, report = desk_run
        assert report.summary["recon0_psnr"] >= 30.0

    def test_repeat_run_is_bit_identical(self, desk_run, tmp_path):
        final, report = desk_run
        config = desk_config()
        again = Trainer(config, tmp_path / "again").fit()
        repeat = evaluate_model(InterpolationService.from_checkpoint(again), iter_eval_triplets(config), config)

        assert again.read_bytes() == final.read_bytes()
        write_rows_csv(tmp_path / "first.csv", report.rows)
        write_rows_csv(tmp_path / "second.csv", repeat.rows)
        assert (tmp_path / "first.csv").read_bytes() == (tmp_path / "second.csv").read_bytes()



@pytest.mark.slow
class TestTrainedMotion:
    """Motion and reconstruction behaviour of the desk-scale checkpoint."""

    @pytest.fixture
    def service(self, desk_run):
        final, _ = desk_run
        return InterpolationService.from_checkpoint(final)

    @pytest.fixture
    def textured_frame(self):
        return random_texture(np.random.default_rng(5), 64, 64).astype(np.float32)

    def test_identical_frames_give_near_zero_flow(self, service, textured_frame):
        frame = frame_to_tensor(textured_frame)
        with torch.no_grad():
            biflow = service.model.motion(frame, frame)

        assert biflow.f01.norm(dim=1).mean().item() <= 0.5
        assert biflow.f10.norm(dim=1).mean().item() <= 0.5

    def test_translation_recovered(self, service):
        """A (6, 0) shift comes back as +-6 columns, signed the way the frame warp reads it."""
        scene = SceneSpec(
            height=64,
            width=64,
            background=random_texture(np.random.default_rng(6), 80, 80),
            background_motion=(6.0, 0.0),
        )
        triplet = render_scene(scene)
        result = service.interpolate(triplet.i0, triplet.i1)

        # direct warping samples I0 at p + t * F_0->1, so the learned flow points backwards
        sign = -1.0 if service.model.frame_warp is FrameWarpMode.DIRECT else 1.0
        expected = np.array([6.0 * sign, 0.0], dtype=np.float32)
        interior = result.f01_up[8:-8, 8:-8]
        epe = np.linalg.norm(interior - expected, axis=-1).mean()
        assert epe <= 1.0

    def test_refine_on_matching_features_adds_little(self, service, textured_frame):
        motion = service.model.motion
        with torch.no_grad():
            features = motion.extract_pyramid(motion.downsample_frame(frame_to_tensor(textured_frame)))
            finest = features[0]
            flow = finest.new_zeros((1, 2, *finest.shape[-2:]))
            delta = motion.refine_level(0, finest, finest, flow)

        assert delta.abs().mean().item() <= 0.25

    def test_identical_frames_interpolate_to_themselves(self, service, textured_frame):
        result = service.interpolate(textured_frame, textured_frame)
        assert psnr(result.frame, textured_frame) >= 40.0

@pytest.mark.slow
class TestUpsamplingAblation:
    def test_guided_upsampling_keeps_more_edges(self, tmp_path):
        """Mean edge IoU over three seeds: GFU at least bilinear on sharp-edge scenes."""
        edge_iou = {}
        for backend in ("bilinear", "afu", "gfu"):
            values = []
            for seed in range(3):
                config = desk_config(seed, backend)
                final = Trainer(config, tmp_path / f"{backend}_{seed}").fit()
                suite = sharp_edge_suite(config)
                report = evaluate_model(InterpolationService.from_checkpoint(final), iter_eval_triplets(suite), suite)
                values.append(report.summary["edge_iou"])
            edge_iou[backend] = float(np.mean(values))

        assert edge_iou["gfu"] >= edge_iou["bilinear"]
