"""
Checkpoint evaluation over a triplet set, with report files.

Triplets come from a folder (``<root>/<seq>/im1..3.png``) or from the
held-out synthetic suite (``eval.synthetic_*`` seeds, disjoint from training).
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np

from schemas.run_config import RunConfig
from services.dataset import find_triplets, load_triplet_frames
from services.evaluation_service import evaluate_frame, overlay, psnr, summarize
from services.interpolation_service import InterpolationService
from services.synthetic_data import generate_synthetic_triplet
from storage.atomic import write_all
from utils import get_logger, measure_time
from utils.constants import ERROR_MESSAGES
from utils.exceptions import ConfigurationError

logger = get_logger(__name__)

ABLATION_COLUMNS = ("psnr", "ssim", "edge_psnr", "edge_ssim", "edge_iou")


@dataclass
class EvalTriplet:
    name: str
    i0: np.ndarray
    it: np.ndarray
    i1: np.ndarray
    t: float = 0.5


@dataclass
class EvaluationReport:
    """Per-frame rows plus nan-ignoring means for the model and the overlay baseline."""

    rows: List[Dict[str, object]] = field(default_factory=list)
    summary: Dict[str, float] = field(default_factory=dict)
    overlay_summary: Dict[str, float] = field(default_factory=dict)
    plugins: List[str] = field(default_factory=list)


def iter_eval_triplets(config: RunConfig, dataset_dir: Optional[Union[str, Path]] = None) -> Iterator[EvalTriplet]:
    """
    Yield evaluation triplets in a fixed order.

    Raises:
        InputError: Missing or empty dataset folder, unreadable frames
    """
    if dataset_dir is not None:
        root = Path(dataset_dir)
        for folder in find_triplets(root):
            i0, it, i1 = load_triplet_frames(folder)
            yield EvalTriplet(folder.relative_to(root).as_posix(), i0, it, i1)
        return

    cfg = config.eval
    for offset in range(cfg.synthetic_count):
        seed = cfg.synthetic_seed + offset
        triplet = generate_synthetic_triplet(seed, size=cfg.synthetic_size, cfg=config.train)
        yield EvalTriplet(f"synthetic_{seed:06d}", triplet.i0, triplet.it, triplet.i1, triplet.t)


@measure_time
def evaluate_model(
    service: InterpolationService,
    triplets: Iterator[EvalTriplet],
    config: RunConfig,
) -> EvaluationReport:
    """
    Interpolate every triplet and score it against the middle frame.

    Each row also carries ``recon0_psnr``: the decoder applied to T_0
    against I_0.
    """
    eval_cfg = config.eval
    report = EvaluationReport(plugins=list(eval_cfg.plugins))
    overlay_rows = []
    for triplet in triplets:
        result = service.interpolate(triplet.i0, triplet.i1, t=triplet.t, reconstruct_inputs=True)
        row: Dict[str, object] = {"name": triplet.name}
        row.update(evaluate_frame(result.frame, triplet.it, eval_cfg, eval_cfg.plugins))
        row["recon0_psnr"] = psnr(result.i0_hat, triplet.i0)
        report.rows.append(row)
        overlay_rows.append(evaluate_frame(overlay(triplet.i0, triplet.i1), triplet.it, eval_cfg))

    report.summary = summarize(report.rows)
    report.overlay_summary = summarize(overlay_rows)
    logger.info(
        "Evaluation finished",
        extra={"extra_data": {
            "frames": len(report.rows),
            "psnr": report.summary.get("psnr"),
            "overlay_psnr": report.overlay_summary.get("psnr"),
        }},
    )
    return report


def _json_number(value: float) -> Optional[float]:
    return None if isinstance(value, float) and math.isnan(value) else value


def rows_csv(rows: Sequence[Dict[str, object]]) -> bytes:
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({
                key: f"{value:.6f}" if isinstance(value, float) else value
                for key, value in row.items()
            })
    return buffer.getvalue().encode("utf-8")


def write_rows_csv(path: Union[str, Path], rows: Sequence[Dict[str, object]]) -> None:
    write_all({Path(path): rows_csv(rows)})


def write_report(report: EvaluationReport, csv_path: Union[str, Path], json_path: Union[str, Path], config: RunConfig) -> None:
    """Per-frame CSV and a summary JSON that also records the edge-mask settings."""
    eval_cfg = config.eval
    summary = {
        "frames": len(report.rows),
        "metrics": {k: _json_number(v) for k, v in report.summary.items()},
        "overlay_baseline": {k: _json_number(v) for k, v in report.overlay_summary.items()},
        "edge_settings": {
            "canny_low": eval_cfg.canny_low,
            "canny_high": eval_cfg.canny_high,
            "canny_sigma": eval_cfg.canny_sigma,
            "edge_dilation": eval_cfg.edge_dilation,
        },
        "non_authoritative": [f"ext_{name}" for name in report.plugins],
    }
    write_all({
        Path(csv_path): rows_csv(report.rows),
        Path(json_path): (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    })


def check_ablation_configs(configs: Sequence[RunConfig]) -> None:
    """
    Ablation checkpoints may differ in the upsampler backend only.

    Raises:
        ConfigurationError: Any other key differs
    """
    reference = configs[0]
    differing = set()
    for other in configs[1:]:
        differing.update(reference.differing_keys(other, ignore=("upsampler.backend",)))
    if differing:
        raise ConfigurationError(ERROR_MESSAGES["checkpoint_mismatch"].format(keys=", ".join(sorted(differing))))


def ablation_rows(backends: Sequence[str], reports: Sequence[EvaluationReport]) -> List[Dict[str, object]]:
    rows = []
    for backend, report in zip(backends, reports):
        row: Dict[str, object] = {"backend": backend}
        row.update({column: report.summary.get(column, float("nan")) for column in ABLATION_COLUMNS})
        rows.append(row)
    return rows


def ablation_markdown(rows: Sequence[Dict[str, object]]) -> str:
    header = ["backend", *ABLATION_COLUMNS]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for row in rows:
        cells = [str(row["backend"])] + [f"{row[c]:.4f}" for c in ABLATION_COLUMNS]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_ablation_report(report_path: Union[str, Path], rows: Sequence[Dict[str, object]]) -> None:
    """``<report>.csv`` and ``<report>.md`` side by side."""
    base = Path(report_path)
    write_all({
        base.with_suffix(".csv"): rows_csv(rows),
        base.with_suffix(".md"): ablation_markdown(rows).encode("utf-8"),
    })
