"""Supervised baseline: encoder plus linear head, best-validation checkpoint."""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..augment import kernels
from ..core.encoders import EncoderSpec, encoder_registry
from ..probe.metrics import MetricsRecord, compute_metrics

logger = logging.getLogger(__name__)


@dataclass
class SupervisedConfig:
    epochs: int = 20
    lr: float = 1e-4
    weight_decay: float = 1e-5
    batch_size: int = 64
    val_fraction: float = 0.2
    seed: int = 0


@dataclass
class SupervisedEpoch:
    epoch: int
    train_loss: float
    val_acc: float


@dataclass
class SupervisedResult:
    encoder: torch.nn.Module
    head: nn.Linear
    classes: list[str]
    history: list[SupervisedEpoch]
    best_epoch: int
    metrics: MetricsRecord
    val_scores: np.ndarray = field(default=None)
    val_labels: np.ndarray = field(default=None)


def _augment(image: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Flips, inversion, and small rotations, each with probability 0.5."""
    if rng.random() < 0.5:
        image = kernels.hflip(image)
    if rng.random() < 0.5:
        image = kernels.vflip(image)
    if rng.random() < 0.5:
        image = 255 - image
    if rng.random() < 0.5:
        image = kernels.rotate(image, float(rng.uniform(0.0, 90.0)))
    return image


def _batch_tensor(images, idx, rng: np.random.Generator | None) -> torch.Tensor:
    arrs = []
    for i in idx:
        img = images[i]
        if rng is not None:
            img = _augment(img, rng)
        arrs.append(kernels.normalize(img).transpose(2, 0, 1))
    return torch.from_numpy(np.stack(arrs))


def supervised_train(
    images,
    labels,
    encoder_spec: EncoderSpec,
    config: SupervisedConfig | None = None,
) -> SupervisedResult:
    """Adaptive-moment training of encoder + head; keeps the best-val epoch."""
    config = config or SupervisedConfig()
    if labels is None:
        raise ValueError("supervised training needs labeled tiles")
    labels = list(labels)
    if any(lbl is None for lbl in labels):
        raise ValueError("supervised training needs labeled tiles")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("supervised training needs at least 2 classes")
    class_to_idx = {c: i for i, c in enumerate(classes)}
    y = np.asarray([class_to_idx[lbl] for lbl in labels], dtype=np.int64)

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(images))
    n_val = max(len(classes), int(round(config.val_fraction * len(images))))
    val_idx, train_idx = order[:n_val], order[n_val:]

    torch.manual_seed(config.seed)
    encoder = encoder_registry(encoder_spec)
    head = nn.Linear(encoder_spec.feature_dim, len(classes))
    params = list(encoder.parameters()) + list(head.parameters())
    opt = torch.optim.Adam(params, lr=config.lr, weight_decay=config.weight_decay)
    loss_fn = nn.CrossEntropyLoss()

    y_val = torch.from_numpy(y[val_idx])
    history: list[SupervisedEpoch] = []
    best_state = None
    best_acc = -1.0
    best_epoch = -1
    for epoch in range(config.epochs):
        encoder.train()
        head.train()
        shuffled = rng.permutation(train_idx)
        total, batches = 0.0, 0
        for start in range(0, len(shuffled), config.batch_size):
            idx = shuffled[start : start + config.batch_size]
            if len(idx) < 2:
                continue
            x = _batch_tensor(images, idx, rng)
            opt.zero_grad()
            loss = loss_fn(head(encoder(x)), torch.from_numpy(y[idx]))
            loss.backward()
            opt.step()
            total += float(loss.detach())
            batches += 1

        encoder.eval()
        head.eval()
        with torch.no_grad():
            scores = head(encoder(_batch_tensor(images, val_idx, None)))
            val_acc = float((scores.argmax(dim=1) == y_val).float().mean())
        history.append(SupervisedEpoch(epoch, total / max(1, batches), val_acc))
        logger.info("supervised epoch %d: loss %.4f val acc %.3f", epoch, total / max(1, batches), val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_state = (
                copy.deepcopy(encoder.state_dict()),
                copy.deepcopy(head.state_dict()),
            )

    if best_state is not None:
        encoder.load_state_dict(best_state[0])
        head.load_state_dict(best_state[1])

    encoder.eval()
    head.eval()
    with torch.no_grad():
        scores = head(encoder(_batch_tensor(images, val_idx, None))).numpy()
    metrics = compute_metrics(scores, y[val_idx])
    return SupervisedResult(
        encoder=encoder,
        head=head,
        classes=classes,
        history=history,
        best_epoch=best_epoch,
        metrics=metrics,
        val_scores=scores,
        val_labels=y[val_idx],
    )
