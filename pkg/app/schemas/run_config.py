"""
Run configuration: namespaced settings, flat ``key = value`` files and overrides.

Merge order is defaults < config file < command-line overrides < VTINKER_SEED.
"""

import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from schemas.evaluation import EvalConfig
from schemas.loss import LossConfig
from schemas.motion import PyramidConfig
from schemas.texture import MatchConfig
from schemas.training import TrainConfig
from schemas.upsampler import UpsamplerConfig
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ConfigurationError


class RunConfig(BaseModel):
    """Every setting a command needs, grouped by namespace."""

    model_config = ConfigDict(extra="forbid")

    motion: PyramidConfig = Field(default_factory=PyramidConfig)
    upsampler: UpsamplerConfig = Field(default_factory=UpsamplerConfig)
    texture: MatchConfig = Field(default_factory=MatchConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)

    @model_validator(mode="after")
    def validate_cross_namespace(self) -> "RunConfig":
        """Sizes and factors shared between namespaces must agree."""
        if self.upsampler.factor != self.motion.downsample:
            raise ValueError(
                f"upsampler.factor ({self.upsampler.factor}) must equal "
                f"motion.downsample ({self.motion.downsample})"
            )
        crop = self.train.crop_size
        if crop % self.size_multiple != 0:
            raise ValueError(f"train.crop_size ({crop}) must be divisible by {self.size_multiple}")
        return self

    @property
    def size_multiple(self) -> int:
        """Frame sides must be multiples of this for one forward pass."""
        return math.lcm(self.motion.size_multiple, 2 * self.texture.s, 8)

    def flatten(self) -> Dict[str, Any]:
        """Flat ``namespace.key`` view, used for logging and checkpoints."""
        return _flatten(self.model_dump(mode="json"))

    @classmethod
    def from_flat(cls, flat: Dict[str, Any]) -> "RunConfig":
        """Build a config from flat keys; unknown keys are rejected."""
        known = set(cls().flatten())
        for key in flat:
            if key not in known:
                raise ConfigurationError(ERROR_MESSAGES["config_unknown_key"].format(key=key))
        try:
            return cls.model_validate(_unflatten(flat))
        except ValidationError as e:
            raise ConfigurationError(ERROR_MESSAGES["config_invalid"].format(detail=_summarize(e)))

    def differing_keys(self, other: "RunConfig", ignore: Iterable[str] = ()) -> List[str]:
        """Flat keys whose values differ between two configs."""
        mine, theirs = self.flatten(), other.flatten()
        skipped = set(ignore)
        return sorted(k for k in mine if k not in skipped and mine[k] != theirs.get(k))


def _flatten(tree: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _unflatten(flat: Dict[str, Any]) -> Dict[str, Any]:
    tree: Dict[str, Any] = {}
    for key, value in flat.items():
        node = tree
        *parents, leaf = key.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return tree


def _summarize(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def parse_value(raw: str) -> Any:
    """Parse one flat value; pydantic performs the typed coercion."""
    value = raw.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    if value.lower() in ("none", "null", ""):
        return None
    return value


def strip_comment(line: str) -> str:
    """Drop a trailing ``#`` comment; a ``#`` inside single or double quotes is kept."""
    quote = None
    for index, char in enumerate(line):
        if quote:
            if char == quote:
                quote = None
        elif char in "\"'":
            quote = char
        elif char == "#":
            return line[:index]
    return line


def parse_config_lines(lines: Iterable[str], source: str = "<config>") -> Dict[str, Any]:
    """Parse ``key = value`` lines with ``#`` comments."""
    flat: Dict[str, Any] = {}
    for number, line in enumerate(lines, start=1):
        text = strip_comment(line).strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigurationError(
                ERROR_MESSAGES["config_bad_line"].format(source=source, line=number, text=line.rstrip())
            )
        key, value = text.split("=", 1)
        flat[key.strip()] = parse_value(value)
    return flat


def parse_overrides(overrides: Iterable[str]) -> Dict[str, Any]:
    """Parse ``key=value`` command-line overrides."""
    return parse_config_lines(overrides, source="--set")


def load_run_config(
    path: Optional[str] = None,
    overrides: Iterable[str] = (),
    seed_override: Optional[int] = None,
) -> RunConfig:
    """
    Resolve a run configuration.

    Args:
        path: Optional flat config file
        overrides: ``key=value`` strings applied after the file
        seed_override: Replaces ``train.seed`` when set (VTINKER_SEED)

    Returns:
        Validated RunConfig

    Raises:
        ConfigurationError: Missing file, unknown key, malformed line or invalid value
    """
    flat: Dict[str, Any] = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigurationError(ERROR_MESSAGES["file_not_found"].format(path=path))
        flat.update(parse_config_lines(config_path.read_text().splitlines(), source=str(config_path)))
    flat.update(parse_overrides(overrides))
    if seed_override is not None:
        flat["train.seed"] = seed_override
    return RunConfig.from_flat(flat)

