"""
Synthetic sprite triplets with exact middle frames and forward flows.

A scene is a textured background (optionally translating) plus sprites
painted in listed order, so later sprites are in front. Every frame is
rendered analytically at its own time step; nothing is warped.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import torch
from scipy import ndimage
from torch.utils.data import Dataset

from schemas.training import TrainConfig


@dataclass
class SpriteSpec:
    """
    A rectangular or elliptical sprite.

    The pose at time tau is centre + tau * motion, scaled by
    1 + tau * (scale - 1) and rotated by tau * rotation (radians) about
    its centre.
    """

    center: Tuple[float, float]
    radius: Tuple[float, float]
    motion: Tuple[float, float]
    texture: np.ndarray
    shape: str = "rect"
    scale: float = 1.0
    rotation: float = 0.0

    def pose(self, tau: float) -> Tuple[np.ndarray, np.ndarray]:
        """Centre and 2x2 linear map (local -> image) at time tau."""
        center = np.asarray(self.center, dtype=np.float64) + tau * np.asarray(self.motion, dtype=np.float64)
        s = 1.0 + tau * (self.scale - 1.0)
        angle = tau * self.rotation
        cos, sin = np.cos(angle), np.sin(angle)
        return center, s * np.array([[cos, -sin], [sin, cos]])


@dataclass
class SceneSpec:
    height: int
    width: int
    background: np.ndarray
    sprites: List[SpriteSpec] = field(default_factory=list)
    background_motion: Tuple[float, float] = (0.0, 0.0)


@dataclass
class Triplet:
    """Frames are (H, W, 3) float32 in [0, 1]; gt_flow01 is (H, W, 2)."""

    i0: np.ndarray
    it: np.ndarray
    i1: np.ndarray
    gt_flow01: np.ndarray
    t: float


def _sample(texture: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Bilinear lookup of every channel at fractional (row, col)."""
    return np.stack(
        [ndimage.map_coordinates(texture[..., c], [rows, cols], order=1, mode="nearest") for c in range(texture.shape[2])],
        axis=-1,
    )


def _sprite_local(sprite: SpriteSpec, tau: float, ys: np.ndarray, xs: np.ndarray):
    """Local sprite coordinates of every pixel and the coverage mask at tau."""
    center, linear = sprite.pose(tau)
    inverse = np.linalg.inv(linear)
    dx = xs - center[0]
    dy = ys - center[1]
    qx = inverse[0, 0] * dx + inverse[0, 1] * dy
    qy = inverse[1, 0] * dx + inverse[1, 1] * dy
    rx, ry = sprite.radius
    if sprite.shape == "ellipse":
        inside = (qx / rx) ** 2 + (qy / ry) ** 2 <= 1.0
    else:
        inside = (np.abs(qx) <= rx) & (np.abs(qy) <= ry)
    return qx, qy, inside


def render_frame(scene: SceneSpec, tau: float) -> np.ndarray:
    """Render the scene at time tau."""
    ys, xs = np.mgrid[0:scene.height, 0:scene.width].astype(np.float64)
    bg = scene.background
    off_y = (bg.shape[0] - scene.height) / 2.0
    off_x = (bg.shape[1] - scene.width) / 2.0
    frame = _sample(
        bg,
        ys + off_y - tau * scene.background_motion[1],
        xs + off_x - tau * scene.background_motion[0],
    )
    for sprite in scene.sprites:
        qx, qy, inside = _sprite_local(sprite, tau, ys, xs)
        if not inside.any():
            continue
        rx, ry = sprite.radius
        tex = sprite.texture
        rows = (qy[inside] + ry) / (2 * ry) * (tex.shape[0] - 1)
        cols = (qx[inside] + rx) / (2 * rx) * (tex.shape[1] - 1)
        frame[inside] = _sample(tex, rows, cols)
    return np.clip(frame, 0.0, 1.0).astype(np.float32)


def forward_flow(scene: SceneSpec) -> np.ndarray:
    """Exact F_0->1 of the topmost surface at every pixel of frame 0."""
    ys, xs = np.mgrid[0:scene.height, 0:scene.width].astype(np.float64)
    flow = np.empty((scene.height, scene.width, 2), dtype=np.float64)
    flow[..., 0] = scene.background_motion[0]
    flow[..., 1] = scene.background_motion[1]
    for sprite in scene.sprites:
        qx, qy, inside = _sprite_local(sprite, 0.0, ys, xs)
        center1, linear1 = sprite.pose(1.0)
        x1 = linear1[0, 0] * qx + linear1[0, 1] * qy + center1[0]
        y1 = linear1[1, 0] * qx + linear1[1, 1] * qy + center1[1]
        flow[inside, 0] = (x1 - xs)[inside]
        flow[inside, 1] = (y1 - ys)[inside]
    return flow.astype(np.float32)


def render_scene(scene: SceneSpec, t: float = 0.5) -> Triplet:
    return Triplet(
        i0=render_frame(scene, 0.0),
        it=render_frame(scene, t),
        i1=render_frame(scene, 1.0),
        gt_flow01=forward_flow(scene),
        t=t,
    )


def random_texture(rng: np.random.Generator, height: int, width: int, flat: bool = False) -> np.ndarray:
    """Smoothed colour noise with stripes, or a single flat colour."""
    if flat:
        return np.broadcast_to(rng.uniform(0.05, 0.95, size=3), (height, width, 3)).copy()
    noise = ndimage.gaussian_filter(rng.random((height, width, 3)), sigma=(1.5, 1.5, 0))
    lo, hi = noise.min(), noise.max()
    noise = (noise - lo) / max(hi - lo, 1e-8)
    freq = rng.uniform(0.1, 0.6)
    angle = rng.uniform(0, np.pi)
    ys, xs = np.mgrid[0:height, 0:width]
    stripes = 0.5 + 0.5 * np.sin(freq * (np.cos(angle) * xs + np.sin(angle) * ys))
    tint = rng.uniform(0.2, 1.0, size=3)
    return np.clip(0.6 * noise + 0.4 * stripes[..., None] * tint, 0.0, 1.0)


def random_scene(
    rng: np.random.Generator,
    size: int,
    cfg: TrainConfig,
    sharp_edges: Optional[bool] = None,
) -> SceneSpec:
    """
    Draw a random scene.

    Args:
        rng: Source of randomness
        size: Square frame side
        cfg: Motion range, sprite counts and affine probability
        sharp_edges: Flat-coloured sprites; defaults to ``cfg.sharp_edges``
    """
    flat = cfg.sharp_edges if sharp_edges is None else sharp_edges
    margin = int(np.ceil(cfg.max_displacement)) + 2
    background = random_texture(rng, size + 2 * margin, size + 2 * margin)
    bg_angle = rng.uniform(0, 2 * np.pi)
    bg_magnitude = rng.uniform(0, cfg.max_displacement / 4)
    scene = SceneSpec(
        height=size,
        width=size,
        background=background,
        background_motion=(bg_magnitude * np.cos(bg_angle), bg_magnitude * np.sin(bg_angle)),
    )

    count = int(rng.integers(cfg.sprites_min, max(cfg.sprites_min, cfg.sprites_max) + 1))
    for _ in range(count):
        rx, ry = rng.uniform(size / 10, size / 4, size=2)
        angle = rng.uniform(0, 2 * np.pi)
        magnitude = rng.uniform(0, cfg.max_displacement)
        affine = rng.random() < cfg.affine_probability
        tex_h, tex_w = int(2 * ry) + 2, int(2 * rx) + 2
        scene.sprites.append(SpriteSpec(
            center=tuple(rng.uniform(0, size, size=2)),
            radius=(rx, ry),
            motion=(magnitude * np.cos(angle), magnitude * np.sin(angle)),
            texture=random_texture(rng, tex_h, tex_w, flat=flat),
            shape="ellipse" if rng.random() < 0.5 else "rect",
            scale=rng.uniform(0.8, 1.25) if affine else 1.0,
            rotation=rng.uniform(-0.25, 0.25) if affine else 0.0,
        ))
    return scene


def generate_synthetic_triplet(
    seed: int,
    scene_spec: Optional[SceneSpec] = None,
    size: int = 128,
    cfg: Optional[TrainConfig] = None,
) -> Triplet:
    """
    Render a triplet from an explicit scene, or a random scene drawn from ``seed``.
    """
    cfg = cfg or TrainConfig()
    if scene_spec is None:
        scene_spec = random_scene(np.random.default_rng(seed), size, cfg)
    return render_scene(scene_spec, cfg.time_step)


def triplet_to_sample(triplet: Triplet) -> dict:
    """Tensor dict consumed by the trainer and evaluator."""

    def chw(array: np.ndarray) -> torch.Tensor:
        return torch.from_numpy(np.ascontiguousarray(array, dtype=np.float32)).permute(2, 0, 1)

    return {
        "i0": chw(triplet.i0),
        "it": chw(triplet.it),
        "i1": chw(triplet.i1),
        "flow01": chw(triplet.gt_flow01),
        "t": torch.tensor(triplet.t, dtype=torch.float32),
    }


class SyntheticTripletDataset(Dataset):
    """Item i is the triplet of seed ``base_seed + i``, independent of worker layout."""

    def __init__(self, length: int, base_seed: int, size: int, cfg: TrainConfig):
        self.length = length
        self.base_seed = base_seed
        self.size = size
        self.cfg = cfg

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, index: int) -> dict:
        return triplet_to_sample(generate_synthetic_triplet(self.base_seed + index, size=self.size, cfg=self.cfg))
