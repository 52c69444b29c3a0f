"""
End-to-end training loop.

Per step: motion estimation, flow upsampling, time warping, proxy and
texture pipeline, reconstruction of I_t (and of I_0 / I_1 when their loss
weights are nonzero), combined loss, AdamW update.
"""

import io
import math
import time
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import torch
from torch.optim.lr_scheduler import LambdaLR
from torch.utils.data import DataLoader, Dataset
from tqdm import tqdm

from config import get_settings
from models.backbone import PerceptualBackbone, build_backbone
from models.interpolator import FrameInterpolator
from ops.losses import build_pair_loss, combined_loss
from schemas.loss import LossVariant
from schemas.run_config import RunConfig
from services.dataset import TripletFolderDataset
from services.synthetic_data import SyntheticTripletDataset
from storage.atomic import atomic_write
from storage.checkpoint import save_checkpoint
from utils import get_logger, seed_everything
from utils.constants import ERROR_MESSAGES
from utils.exceptions import NonFiniteLossError

logger = get_logger(__name__)

CHECKPOINT_SUFFIX = ".txmp"


def checkpoint_name(step: int) -> str:
    return f"step_{step:07d}{CHECKPOINT_SUFFIX}"


def warmup_factor(warmup_steps: int):
    """Linear warmup to the base rate, constant afterwards."""

    def factor(step: int) -> float:
        if warmup_steps <= 0:
            return 1.0
        return min(1.0, (step + 1) / warmup_steps)

    return factor


class Trainer:
    """
    Owns the model, optimizer and data stream of one training run.

    Usage:
        trainer = Trainer(config, "runs/gfu")
        final_checkpoint = trainer.fit()
    """

    def __init__(
        self,
        config: RunConfig,
        output_dir: Union[str, Path],
        device: Union[str, torch.device, None] = None,
        backbone: Optional[PerceptualBackbone] = None,
        dataset: Optional[Dataset] = None,
    ):
        settings = get_settings()
        self.config = config
        self.output_dir = Path(output_dir)
        self.device = torch.device(device or settings.device)
        self.generator = seed_everything(
            config.train.seed,
            deterministic=settings.deterministic,
            num_threads=settings.num_threads,
        )

        self.model = FrameInterpolator(config).to(self.device)
        if config.train.freeze_motion:
            self.model.motion.requires_grad_(False)
        trainable = [p for p in self.model.parameters() if p.requires_grad]
        self.optimizer = torch.optim.AdamW(
            trainable,
            lr=config.train.learning_rate,
            weight_decay=config.train.weight_decay,
        )
        self.scheduler = LambdaLR(self.optimizer, warmup_factor(config.train.warmup_steps))

        weights = config.loss.weights
        needs_backbone = (
            LossVariant(config.loss.variant) is LossVariant.STYLE
            and (weights.w_vgg > 0 or weights.w_gram > 0)
        )
        if backbone is None and needs_backbone:
            backbone = build_backbone(config.loss.backbone)
        self.backbone = backbone.to(self.device) if backbone is not None else None
        self.pair_loss = build_pair_loss(config.loss, self.backbone)
        self.reconstruct_inputs = weights.w_0 > 0 or weights.w_1 > 0

        self.dataset = dataset
        self.step = 0

    def build_dataset(self, iterations: int) -> Dataset:
        train = self.config.train
        draws = iterations * train.batch_size
        if train.dataset_dir:
            return TripletFolderDataset(
                train.dataset_dir,
                crop_size=train.crop_size,
                augment=True,
                seed=train.seed,
                draws=draws,
            )
        return SyntheticTripletDataset(
            length=draws,
            base_seed=train.seed * 1_000_003,
            size=train.crop_size,
            cfg=train,
        )

    def build_loader(self, iterations: int) -> DataLoader:
        dataset = self.dataset if self.dataset is not None else self.build_dataset(iterations)
        return DataLoader(
            dataset,
            batch_size=self.config.train.batch_size,
            shuffle=False,
            num_workers=self.config.train.num_workers,
            drop_last=True,
        )

    def compute_loss(self, batch: Dict[str, torch.Tensor]) -> torch.Tensor:
        i0 = batch["i0"].to(self.device)
        it = batch["it"].to(self.device)
        i1 = batch["i1"].to(self.device)
        t = float(batch["t"][0]) if "t" in batch else self.config.train.time_step
        output = self.model(i0, i1, t=t, reconstruct_inputs=self.reconstruct_inputs)
        return combined_loss(
            output.frame,
            output.i0_hat,
            output.i1_hat,
            it,
            i0,
            i1,
            self.config.loss.weights,
            pair_loss=self.pair_loss,
        )

    def train_step(self, batch: Dict[str, torch.Tensor]) -> float:
        """
        One optimizer update.

        Raises:
            NonFiniteLossError: Loss is NaN or infinite; a diagnostics dump is written first
        """
        self.model.train()
        self.optimizer.zero_grad(set_to_none=True)
        loss = self.compute_loss(batch)
        value = float(loss.detach())
        if not math.isfinite(value):
            path = self.dump_diagnostics(batch, value)
            raise NonFiniteLossError(ERROR_MESSAGES["non_finite_loss"].format(
                loss=value, step=self.step, path=path))
        loss.backward()
        self.optimizer.step()
        self.scheduler.step()
        self.step += 1
        return value

    def dump_diagnostics(self, batch: Dict[str, torch.Tensor], loss: float) -> Path:
        """Save inputs, step and parameter norms next to the checkpoints."""
        path = self.output_dir / f"diagnostics_step_{self.step:07d}.pt"
        payload = {
            "step": self.step,
            "loss": loss,
            "inputs": {k: v.detach().cpu() for k, v in batch.items() if isinstance(v, torch.Tensor)},
            "parameter_norms": {
                name: float(p.detach().norm()) for name, p in self.model.named_parameters()
            },
        }
        buffer = io.BytesIO()
        torch.save(payload, buffer)
        with atomic_write(path) as handle:
            handle.write(buffer.getvalue())
        logger.error(
            "Non-finite loss, diagnostics written",
            extra={"extra_data": {"step": self.step, "loss": loss, "path": str(path)}},
        )
        return path

    def save(self, name: Optional[str] = None) -> Path:
        path = self.output_dir / (name or checkpoint_name(self.step))
        save_checkpoint(path, self.model.sections(), self.config, step=self.step)
        return path

    def fit(self, iterations: Optional[int] = None, batches: Optional[Iterable] = None) -> Path:
        """
        Run the loop and return the final checkpoint path.

        Args:
            iterations: Step count (default ``train.iterations``)
            batches: Explicit batch stream instead of the configured dataset
        """
        train = self.config.train
        iterations = train.iterations if iterations is None else iterations
        stream = batches if batches is not None else self.build_loader(iterations)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        logger.info(
            "Training started",
            extra={"extra_data": {
                "iterations": iterations,
                "device": str(self.device),
                "trainable_parameters": sum(p.numel() for p in self.model.parameters() if p.requires_grad),
            }},
        )
        started = time.perf_counter()
        progress = tqdm(total=iterations, desc="train", disable=None)
        for batch in stream:
            if self.step >= iterations:
                break
            loss = self.train_step(batch)
            progress.update(1)
            if self.step % train.log_every == 0 or self.step == iterations:
                logger.info(
                    "Training step",
                    extra={"extra_data": {
                        "step": self.step,
                        "loss": loss,
                        "lr": self.scheduler.get_last_lr()[0],
                        "elapsed_s": round(time.perf_counter() - started, 3),
                    }},
                )
            if self.step % train.checkpoint_every == 0:
                self.save()
        progress.close()

        final = self.save("final" + CHECKPOINT_SUFFIX)
        logger.info("Training finished", extra={"extra_data": {"step": self.step, "checkpoint": str(final)}})
        return final
