"""Linear probing of frozen embeddings with SGD and cosine annealing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from .metrics import MetricsRecord, compute_metrics


@dataclass
class ProbeConfig:
    epochs: int = 100
    lr: float = 0.3
    momentum: float = 0.9
    batch_size: int = 256
    train_per_class: int = 3500
    test_per_class: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ValueError("per-class counts must be >= 1")


def balanced_split(labels, train_per_class: int, test_per_class: int, rng: np.random.Generator):
    """Disjoint balanced train/test index sets; errors name deficient classes."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    need = train_per_class + test_per_class
    deficient = [
        (str(c), int((labels == c).sum())) for c in classes if (labels == c).sum() < need
    ]
    if deficient:
        detail = ", ".join(f"{c} has {n} < {need}" for c, n in deficient)
        raise ValueError(f"not enough samples for a balanced split: {detail}")
    train_idx, test_idx = [], []
    for c in classes:
        pool = rng.permutation(np.flatnonzero(labels == c))
        train_idx.extend(pool[:train_per_class])
        test_idx.extend(pool[train_per_class:need])
    return np.asarray(train_idx), np.asarray(test_idx)


@dataclass
class ProbeResult:
    head: nn.Linear
    metrics: MetricsRecord
    test_scores: np.ndarray
    test_labels: np.ndarray
    history: list[float]


def _train_head(
    features: torch.Tensor, targets: torch.Tensor, n_classes: int, cfg: ProbeConfig
) -> tuple[nn.Linear, list[float]]:
    torch.manual_seed(cfg.seed)
    head = nn.Linear(features.shape[1], n_classes)
    opt = torch.optim.SGD(head.parameters(), lr=cfg.lr, momentum=cfg.momentum)
    loss_fn = nn.CrossEntropyLoss()
    rng = np.random.default_rng(cfg.seed)
    history = []
    n = features.shape[0]
    for epoch in range(cfg.epochs):
        lr = cfg.lr * 0.5 * (1.0 + math.cos(math.pi * epoch / max(1, cfg.epochs)))
        for group in opt.param_groups:
            group["lr"] = lr
        order = rng.permutation(n)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            opt.zero_grad()
            loss = loss_fn(head(features[idx]), targets[idx])
            loss.backward()
            opt.step()
            epoch_loss += float(loss.detach())
            batches += 1
        history.append(epoch_loss / max(1, batches))
    return head, history


def train_probe(
    embeddings,
    labels,
    cfg: ProbeConfig,
    mix_fn=None,
) -> ProbeResult:
    """Train a single linear layer on frozen features, report held-out metrics.

    ``mix_fn`` optionally maps (features, one-hot targets, rng) to an
    augmented training stream (evaluation-phase mixing); it never touches the
    held-out split.
    """
    embeddings = np.asarray(embeddings, dtype=np.float32)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("probe needs at least 2 classes")
    class_to_idx = {c: i for i, c in enumerate(classes)}
    y = np.asarray([class_to_idx[c] for c in labels], dtype=np.int64)

    rng = np.random.default_rng(cfg.seed)
    train_idx, test_idx = balanced_split(y, cfg.train_per_class, cfg.test_per_class, rng)

    # standardize features on the training split only
    mu = embeddings[train_idx].mean(axis=0, keepdims=True)
    sigma = embeddings[train_idx].std(axis=0, keepdims=True) + 1e-6
    feats = (embeddings - mu) / sigma

    x_train = torch.from_numpy(feats[train_idx])
    y_train = torch.from_numpy(y[train_idx])
    if mix_fn is not None:
        onehot = torch.zeros(len(train_idx), classes.size)
        onehot[torch.arange(len(train_idx)), y_train] = 1.0
        x_train, y_soft = mix_fn(x_train, onehot, rng)
        head, history = _train_head_soft(x_train, y_soft, cfg)
    else:
        head, history = _train_head(x_train, y_train, classes.size, cfg)

    head.eval()
    with torch.no_grad():
        scores = head(torch.from_numpy(feats[test_idx])).numpy()
    metrics = compute_metrics(scores, y[test_idx])
    return ProbeResult(
        head=head, metrics=metrics, test_scores=scores, test_labels=y[test_idx], history=history
    )


def _train_head_soft(features: torch.Tensor, soft_targets: torch.Tensor, cfg: ProbeConfig):
    """Cross-entropy against soft labels (used by the mixing ablation)."""
    torch.manual_seed(cfg.seed)
    head = nn.Linear(features.shape[1], soft_targets.shape[1])
    opt = torch.optim.SGD(head.parameters(), lr=cfg.lr, momentum=cfg.momentum)
    log_softmax = nn.LogSoftmax(dim=1)
    rng = np.random.default_rng(cfg.seed)
    history = []
    n = features.shape[0]
    for epoch in range(cfg.epochs):
        lr = cfg.lr * 0.5 * (1.0 + math.cos(math.pi * epoch / max(1, cfg.epochs)))
        for group in opt.param_groups:
            group["lr"] = lr
        order = rng.permutation(n)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            opt.zero_grad()
            loss = -(soft_targets[idx] * log_softmax(head(features[idx]))).sum(dim=1).mean()
            loss.backward()
            opt.step()
            epoch_loss += float(loss.detach())
            batches += 1
        history.append(epoch_loss / max(1, batches))
    return head, history
