"""
Tests for run configuration parsing, merging and validation.
"""

import pytest

from schemas import (
    LossVariant,
    MatchConfig,
    RunConfig,
    UpsamplerBackend,
    UpsamplerConfig,
    load_run_config,
    parse_config_lines,
)
from schemas.run_config import parse_overrides
from utils.exceptions import ConfigurationError


class TestParseConfigLines:
    """Test suite for the flat key = value parser."""

    def test_comments_and_blank_lines(self):
        flat = parse_config_lines([
            "# header comment",
            "",
            "texture.N = 5   # wider window",
            "  upsampler.backend=afu",
            "train.dataset_dir = none",
        ])

        assert flat == {"texture.N": "5", "upsampler.backend": "afu", "train.dataset_dir": None}

    def test_quoted_value(self):
        flat = parse_config_lines(['train.dataset_dir = "data/vimeo triplets"'])
        assert flat["train.dataset_dir"] == "data/vimeo triplets"

    def test_hash_inside_quotes_is_kept(self):
        flat = parse_config_lines([
            'train.dataset_dir = "runs/#3"  # quoted hash',
            "loss.backbone = 'vgg#stub'",
        ])

        assert flat == {"train.dataset_dir": "runs/#3", "loss.backbone": "vgg#stub"}

    def test_later_lines_win(self):
        assert parse_config_lines(["texture.N = 3", "texture.N = 7"]) == {"texture.N": "7"}

    def test_missing_equals(self):
        with pytest.raises(ConfigurationError) as exc_info:
            parse_config_lines(["texture.N 5"], source="run.cfg")

        assert "run.cfg:1" in exc_info.value.message
        assert exc_info.value.exit_code == 4


class TestRunConfig:
    """Test suite for RunConfig."""

    def test_defaults(self):
        config = RunConfig()

        assert config.texture.s == 8
        assert config.texture.N == 3
        assert config.upsampler.backend == UpsamplerBackend.GFU
        assert config.loss.variant == LossVariant.STYLE
        assert (config.loss.weights.w_t, config.loss.weights.w_0, config.loss.weights.w_1) == (0.8, 0.1, 0.1)
        assert config.size_multiple == 16

    def test_flatten_keys(self):
        flat = RunConfig().flatten()

        assert flat["texture.N"] == 3
        assert flat["loss.weights.w_gram"] == 40.0
        assert flat["upsampler.backend"] == "gfu"
        assert flat["eval.plugins"] == []

    def test_from_flat_coerces_strings(self):
        config = RunConfig.from_flat({
            "texture.N": "5",
            "train.freeze_motion": "true",
            "loss.weights.w_vgg": "0.5",
            "upsampler.backend": "bilinear",
        })

        assert config.texture.N == 5
        assert config.train.freeze_motion is True
        assert config.loss.weights.w_vgg == 0.5
        assert config.upsampler.backend == UpsamplerBackend.BILINEAR

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError) as exc_info:
            RunConfig.from_flat({"texture.window": "3"})

        assert "texture.window" in exc_info.value.message
        assert exc_info.value.exit_code == 4

    @pytest.mark.parametrize(
        "key, value",
        [
            ("texture.N", "4"),
            ("texture.s", "6"),
            ("motion.downsample", "3"),
            ("upsampler.backend", "bicubic"),
            ("loss.variant", "perceptual"),
            ("train.time_step", "1.0"),
            ("eval.canny_low", "0.5"),
        ],
    )
    def test_invalid_values(self, key, value):
        with pytest.raises(ConfigurationError) as exc_info:
            RunConfig.from_flat({key: value})

        assert exc_info.value.exit_code == 4

    def test_factor_must_match_downsample(self):
        with pytest.raises(ConfigurationError) as exc_info:
            RunConfig.from_flat({"upsampler.factor": "4"})

        assert "upsampler.factor" in exc_info.value.message

    def test_crop_must_fit_size_multiple(self):
        with pytest.raises(ConfigurationError):
            RunConfig.from_flat({"train.crop_size": "200"})

    def test_plugins_comma_separated(self):
        config = RunConfig.from_flat({"eval.plugins": "lpips, stub"})
        assert config.eval.plugins == ["lpips", "stub"]

    def test_differing_keys(self, small_config, config_builder):
        other = config_builder(
            texture=MatchConfig(s=4, N=5, C=8, Cprime=4),
            upsampler=UpsamplerConfig(backend="afu", guidance_channels=4),
        )

        assert small_config.differing_keys(other) == ["texture.N", "upsampler.backend"]
        assert small_config.differing_keys(other, ignore=["upsampler.backend"]) == ["texture.N"]
        assert small_config.differing_keys(small_config) == []


class TestLoadRunConfig:
    """Test suite for load_run_config precedence."""

    def test_no_sources_gives_defaults(self):
        assert load_run_config() == RunConfig()

    def test_file_round_trip(self, config_file, small_config):
        assert load_run_config(str(config_file)) == small_config

    def test_override_beats_file(self, config_file):
        config = load_run_config(str(config_file), overrides=["texture.N=5", "upsampler.backend=afu"])

        assert config.texture.N == 5
        assert config.upsampler.backend == UpsamplerBackend.AFU
        assert config.texture.s == 4

    def test_seed_override_beats_everything(self, config_file):
        config = load_run_config(str(config_file), overrides=["train.seed=3"], seed_override=11)
        assert config.train.seed == 11

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_run_config(str(tmp_path / "absent.cfg"))

    def test_unknown_override(self):
        with pytest.raises(ConfigurationError):
            load_run_config(overrides=["texture.bogus=1"])

    def test_override_syntax(self):
        assert parse_overrides(["eval.canny_sigma=2.0"]) == {"eval.canny_sigma": "2.0"}
        with pytest.raises(ConfigurationError):
            parse_overrides(["eval.canny_sigma"])
