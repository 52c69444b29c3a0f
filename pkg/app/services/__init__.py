"""Services module."""

from .benchmark_service import EvaluationReport, evaluate_model, iter_eval_triplets
from .dataset import TripletFolderDataset, find_triplets
from .evaluation_service import (
    MetricRegistry,
    edge_iou,
    evaluate_frame,
    external_metric,
    get_metric_registry,
    overlay,
    psnr,
    ssim,
)
from .interpolation_service import InterpolationResult, InterpolationService
from .synthetic_data import SyntheticTripletDataset, generate_synthetic_triplet
from .training_service import Trainer
from .visualization import flow_to_color, write_matches

__all__ = [
    "EvaluationReport",
    "evaluate_model",
    "iter_eval_triplets",
    "TripletFolderDataset",
    "find_triplets",
    "MetricRegistry",
    "edge_iou",
    "evaluate_frame",
    "external_metric",
    "get_metric_registry",
    "overlay",
    "psnr",
    "ssim",
    "InterpolationResult",
    "InterpolationService",
    "SyntheticTripletDataset",
    "generate_synthetic_triplet",
    "Trainer",
    "flow_to_color",
    "write_matches",
]
