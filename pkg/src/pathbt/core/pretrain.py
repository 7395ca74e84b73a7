"""Two-view pretraining loop with LARS and a warmup-then-cosine schedule."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..augment.policy import AugmentationPolicy, apply_policy, derive_rng
from .encoders import EncoderSpec, encoder_registry
from .lars import LARS, lars_param_groups
from .objective import bt_loss_from_raw
from .projector import build_projector

logger = logging.getLogger(__name__)

LOSS_CSV_FIELDS = ("epoch", "train_loss", "val_loss", "invariance", "redundancy")


@dataclass
class BTConfig:
    batch_size: int = 512
    lam: float = 0.0051
    projector_dims: tuple[int, ...] = (8192, 8192, 8192)
    epochs: int = 100
    lr_weights: float = 0.2
    lr_biases: float = 0.0048
    warmup_epochs: int = 10
    weight_decay: float = 1e-6
    momentum: float = 0.9
    seed: int = 0
    val_fraction: float = 0.1
    eps: float = 1e-5
    workers: int = 1

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if any(int(d) < 1 for d in self.projector_dims):
            raise ValueError("projector dims must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    invariance: float
    redundancy: float


@dataclass
class PretrainResult:
    encoder: torch.nn.Module
    projector: torch.nn.Module
    history: list[EpochRecord]
    config: BTConfig
    encoder_spec: EncoderSpec
    policy: AugmentationPolicy
    checkpoints: dict[int, Path] = field(default_factory=dict)

    @property
    def loss_history(self) -> list[float]:
        return [r.train_loss for r in self.history]


def lr_factor(step: int, total_steps: int, warmup_steps: int) -> float:
    """Linear warmup to 1, then cosine decay to 0 at the final step."""
    if warmup_steps > 0 and step < warmup_steps:
        return (step + 1) / warmup_steps
    if total_steps <= warmup_steps:
        return 1.0
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return 0.5 * (1.0 + math.cos(math.pi * progress))


def _augment_pair(image: np.ndarray, policy: AugmentationPolicy, seed: int, epoch: int, index: int):
    view_a = apply_policy(image, policy.branch_a, derive_rng(seed, epoch, index, 0))
    view_b = apply_policy(image, policy.branch_b, derive_rng(seed, epoch, index, 1))
    return view_a, view_b


def make_views(
    images,
    indices,
    policy: AugmentationPolicy,
    seed: int,
    epoch: int,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Augment both branches for the given dataset indices, as NCHW tensors."""
    s = policy.output_size
    a = np.empty((len(indices), s, s, 3), dtype=np.float32)
    b = np.empty_like(a)

    def work(slot: int) -> None:
        idx = int(indices[slot])
        a[slot], b[slot] = _augment_pair(images[idx], policy, seed, epoch, idx)

    if pool is not None:
        list(pool.map(work, range(len(indices))))
    else:
        for slot in range(len(indices)):
            work(slot)
    to_tensor = lambda arr: torch.from_numpy(arr.transpose(0, 3, 1, 2).copy())
    return to_tensor(a), to_tensor(b)


def pretrain(
    images,
    policy: AugmentationPolicy,
    encoder_spec: EncoderSpec,
    config: BTConfig,
    out_dir: str | Path | None = None,
    eval_at_epochs: tuple[int, ...] = (),
) -> PretrainResult:
    """Train an encoder on unlabeled tiles with the two-view objective.

    Per step: sample a batch, produce both augmented views, encode, project,
    standardize, cross-correlate, penalize, and take a LARS step under the
    warmup-then-cosine schedule. Records one train/validation loss row per
    epoch; aborts with diagnostics when the loss becomes non-finite.
    """
    n = len(images)
    if n == 0:
        raise ValueError("dataset is empty")
    if config.batch_size > n:
        raise ValueError(f"batch_size {config.batch_size} exceeds dataset size {n}")

    torch.manual_seed(config.seed)
    encoder = encoder_registry(encoder_spec)
    projector = build_projector(encoder_spec.feature_dim, config.projector_dims)
    model = torch.nn.ModuleDict({"encoder": encoder, "projector": projector})
    opt = LARS(
        lars_param_groups(
            model,
            lr_weights=config.lr_weights,
            lr_biases=config.lr_biases,
            weight_decay=config.weight_decay,
            momentum=config.momentum,
        )
    )
    base_lrs = [g["lr"] for g in opt.param_groups]

    split_rng = np.random.default_rng(config.seed)
    order = split_rng.permutation(n)
    n_val = int(round(config.val_fraction * n))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) < config.batch_size:
        train_idx, val_idx = order, order[:0]

    steps_per_epoch = max(1, len(train_idx) // config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    warmup_steps = config.warmup_epochs * steps_per_epoch

    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        snapshot = {
            "config": asdict(config),
            "encoder_spec": asdict(encoder_spec),
            "policy": json.loads(policy.to_json()),
            "n_images": n,
        }
        (out_dir / "config.json").write_text(json.dumps(snapshot, indent=2), encoding="utf-8")

    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    history: list[EpochRecord] = []
    result = PretrainResult(
        encoder=encoder,
        projector=projector,
        history=history,
        config=config,
        encoder_spec=encoder_spec,
        policy=policy,
    )
    step = 0
    try:
        for epoch in range(config.epochs):
            model.train()
            epoch_rng = np.random.default_rng([config.seed, epoch])
            shuffled = epoch_rng.permutation(train_idx)
            sums = np.zeros(3)
            batches = 0
            for start in range(0, steps_per_epoch * config.batch_size, config.batch_size):
                batch_idx = shuffled[start : start + config.batch_size]
                xa, xb = make_views(images, batch_idx, policy, config.seed, epoch, pool)
                za = projector(encoder(xa))
                zb = projector(encoder(xb))
                terms = bt_loss_from_raw(za, zb, config.lam, config.eps)
                t, i, r = terms.detach_floats()
                if not math.isfinite(t):
                    raise RuntimeError(
                        f"non-finite loss at epoch {epoch} step {batches}: "
                        f"total={t} invariance={i} redundancy={r}"
                    )
                factor = lr_factor(step, total_steps, warmup_steps)
                for group, base in zip(opt.param_groups, base_lrs):
                    group["lr"] = base * factor
                opt.zero_grad()
                terms.total.backward()
                opt.step()
                sums += (t, i, r)
                batches += 1
                step += 1
            train_loss, invariance, redundancy = sums / max(1, batches)

            val_loss = float("nan")
            if len(val_idx) >= 2:
                model.eval()
                with torch.no_grad():
                    vsums = 0.0
                    vbatches = 0
                    for start in range(0, len(val_idx), config.batch_size):
                        batch_idx = val_idx[start : start + config.batch_size]
                        if len(batch_idx) < 2:
                            continue
                        xa, xb = make_views(
                            images, batch_idx, policy, config.seed + 1, epoch, pool
                        )
                        terms = bt_loss_from_raw(
                            projector(encoder(xa)), projector(encoder(xb)), config.lam, config.eps
                        )
                        vsums += float(terms.total)
                        vbatches += 1
                    if vbatches:
                        val_loss = vsums / vbatches

            history.append(
                EpochRecord(
                    epoch=epoch,
                    train_loss=float(train_loss),
                    val_loss=val_loss,
                    invariance=float(invariance),
                    redundancy=float(redundancy),
                )
            )
            logger.info(
                "epoch %d: train %.4f val %.4f (inv %.4f red %.4f)",
                epoch,
                train_loss,
                val_loss,
                invariance,
                redundancy,
            )
            if out_dir is not None and (epoch + 1) in eval_at_epochs:
                path = out_dir / f"checkpoint_e{epoch + 1}.pt"
                save_checkpoint(result, path)
                result.checkpoints[epoch + 1] = path
    finally:
        if pool is not None:
            pool.shutdown()

    if out_dir is not None:
        write_loss_csv(history, out_dir / "losses.csv")
        path = out_dir / "checkpoint.pt"
        save_checkpoint(result, path)
        result.checkpoints[config.epochs] = path
    return result


def write_loss_csv(history: list[EpochRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(LOSS_CSV_FIELDS)
        for rec in history:
            writer.writerow([rec.epoch, rec.train_loss, rec.val_loss, rec.invariance, rec.redundancy])


def save_checkpoint(result: PretrainResult, path: str | Path) -> None:
    torch.save(
        {
            "encoder": result.encoder.state_dict(),
            "projector": result.projector.state_dict(),
            "encoder_spec": asdict(result.encoder_spec),
            "config": asdict(result.config),
        },
        path,
    )


def load_encoder_checkpoint(path: str | Path) -> tuple[torch.nn.Module, EncoderSpec]:
    """Rebuild the encoder from a checkpoint file."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    spec_dict = dict(payload["encoder_spec"])
    spec = EncoderSpec(
        family=spec_dict["family"],
        init="random",
        feature_dim=spec_dict.get("feature_dim"),
    )
    encoder = encoder_registry(spec)
    encoder.load_state_dict(payload["encoder"])
    return encoder, spec
