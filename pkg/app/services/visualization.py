"""
Flow colour coding and match-map dumps.
"""

import csv
import io
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from matplotlib.colors import hsv_to_rgb

from models.texture_mapping import MatchIndexMap
from storage.atomic import write_all
from storage.images import encode_png


def flow_to_color(flow: np.ndarray, max_mag: Optional[float] = None) -> np.ndarray:
    """
    Colour-wheel image of an (H, W, 2) flow.

    Hue is the direction atan2(v, u) (0 = +u), saturation the magnitude
    over ``max_mag`` (default: the field maximum), value is 1; zero flow is white.
    """
    u = np.asarray(flow[..., 0], dtype=np.float64)
    v = np.asarray(flow[..., 1], dtype=np.float64)
    magnitude = np.hypot(u, v)
    scale = float(magnitude.max()) if max_mag is None else float(max_mag)

    hsv = np.empty(u.shape + (3,), dtype=np.float64)
    hsv[..., 0] = np.mod(np.arctan2(v, u) / (2 * np.pi), 1.0)
    hsv[..., 1] = np.clip(magnitude / scale, 0.0, 1.0) if scale > 0 else 0.0
    hsv[..., 2] = 1.0
    return hsv_to_rgb(hsv).astype(np.float32)


def matches_to_triptych(matches: MatchIndexMap, index: int = 0) -> np.ndarray:
    """dx | dy | e panels side by side as an RGB image in [0, 1]."""
    dx = matches.dx[index].cpu().numpy().astype(np.float64)
    dy = matches.dy[index].cpu().numpy().astype(np.float64)
    e = matches.e[index].cpu().numpy().astype(np.float64)
    reach = max(float(np.abs(dx).max()), float(np.abs(dy).max()), 1.0)
    panels = [(dx / reach + 1) / 2, (dy / reach + 1) / 2, e]
    separator = np.ones((dx.shape[0], 1))
    strip = np.concatenate([panels[0], separator, panels[1], separator, panels[2]], axis=1)
    return np.repeat(strip[..., None], 3, axis=2).astype(np.float32)


def matches_csv(matches: MatchIndexMap, index: int = 0) -> bytes:
    """One CSV row (x, y, dx, dy, e, score) per grid cell."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=["x", "y", "dx", "dy", "e", "score"])
    writer.writeheader()
    dx = matches.dx[index].cpu().numpy()
    dy = matches.dy[index].cpu().numpy()
    e = matches.e[index].cpu().numpy()
    score = matches.score[index].detach().cpu().numpy()
    for y in range(dx.shape[0]):
        for x in range(dx.shape[1]):
            writer.writerow({
                "x": x,
                "y": y,
                "dx": int(dx[y, x]),
                "dy": int(dy[y, x]),
                "e": int(e[y, x]),
                "score": f"{float(score[y, x]):.6g}",
            })
    return buffer.getvalue().encode("utf-8")


def match_payloads(
    matches: MatchIndexMap,
    png_path: Union[str, Path],
    csv_path: Union[str, Path],
    index: int = 0,
) -> Dict[Path, bytes]:
    return {
        Path(png_path): encode_png(matches_to_triptych(matches, index)),
        Path(csv_path): matches_csv(matches, index),
    }


def write_matches(matches: MatchIndexMap, png_path: Union[str, Path], csv_path: Union[str, Path], index: int = 0) -> None:
    """Dump the match map as a PNG triptych and a CSV of (x, y, dx, dy, e, score)."""
    write_all(match_payloads(matches, png_path, csv_path, index))
