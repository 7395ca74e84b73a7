"""Training and prediction for attention-based slide classification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..probe.metrics import MetricsRecord, compute_metrics
from .bags import AttentionBag
from .model import AttentionMILClassifier

logger = logging.getLogger(__name__)


@dataclass
class MILConfig:
    attention_hidden: int = 128
    hidden_dim: int = 128
    gated: bool = True
    instance_loss_weight: float = 0.0
    epochs: int = 30
    lr: float = 1e-3
    weight_decay: float = 1e-4
    test_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.instance_loss_weight < 0:
            raise ValueError("instance_loss_weight must be >= 0")


@dataclass
class MILEpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_auc: float


@dataclass
class MILResult:
    model: AttentionMILClassifier
    classes: list[str]
    metrics: MetricsRecord
    history: list[MILEpochRecord]
    train_slides: list[str]
    test_slides: list[str]
    test_scores: np.ndarray = field(default=None)
    test_labels: np.ndarray = field(default=None)


def stratified_slide_split(labels, test_fraction: float, rng: np.random.Generator):
    """Slide-level stratified split; every class lands in both partitions."""
    labels = np.asarray(labels)
    train_idx, test_idx = [], []
    for c in np.unique(labels):
        pool = rng.permutation(np.flatnonzero(labels == c))
        n_test = max(1, int(round(test_fraction * len(pool))))
        if len(pool) - n_test < 1:
            raise ValueError(f"degenerate split: class {c!r} has only {len(pool)} bags")
        test_idx.extend(pool[:n_test])
        train_idx.extend(pool[n_test:])
    return np.asarray(train_idx), np.asarray(test_idx)


def _instance_loss(instance_logits: torch.Tensor, attention: torch.Tensor, target: int) -> torch.Tensor:
    """Clustering-style auxiliary loss: the most attended instances should
    score the bag class, the least attended should not."""
    m = attention.shape[0]
    k = max(1, min(4, m // 2))
    top = torch.topk(attention, k).indices
    loss = nn.functional.cross_entropy(
        instance_logits[top], torch.full((k,), target, dtype=torch.long)
    )
    if m > k:
        bottom = torch.topk(-attention, k).indices
        # push least-attended instances toward a uniform (uninformative) posterior
        log_probs = torch.log_softmax(instance_logits[bottom], dim=1)
        loss = loss - log_probs.mean()
    return loss


def train_mil(bags: list[AttentionBag], config: MILConfig | None = None) -> MILResult:
    """Fit the attention classifier on bag embeddings, report held-out metrics."""
    config = config or MILConfig()
    if not bags:
        raise ValueError("no bags to train on")
    labels = [b.label for b in bags]
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("MIL training needs at least 2 classes")
    counts = {c: labels.count(c) for c in classes}
    thin = [c for c, n in counts.items() if n < 2]
    if thin:
        raise ValueError(f"degenerate split: classes with fewer than 2 bags: {thin}")
    class_to_idx = {c: i for i, c in enumerate(classes)}
    y = np.asarray([class_to_idx[b.label] for b in bags])

    rng = np.random.default_rng(config.seed)
    train_idx, test_idx = stratified_slide_split(y, config.test_fraction, rng)

    torch.manual_seed(config.seed)
    model = AttentionMILClassifier(
        in_dim=bags[0].instances.shape[1],
        n_classes=len(classes),
        hidden_dim=config.hidden_dim,
        attention_hidden=config.attention_hidden,
    )
    opt = torch.optim.Adam(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)
    loss_fn = nn.CrossEntropyLoss()

    tensors = [torch.from_numpy(b.instances) for b in bags]
    history: list[MILEpochRecord] = []
    for epoch in range(config.epochs):
        model.train()
        order = rng.permutation(train_idx)
        train_loss = 0.0
        for i in order:
            opt.zero_grad()
            logits, attention, inst_logits = model(tensors[i])
            loss = loss_fn(logits.unsqueeze(0), torch.tensor([y[i]]))
            if config.instance_loss_weight > 0:
                loss = loss + config.instance_loss_weight * _instance_loss(
                    inst_logits, attention.detach(), int(y[i])
                )
            loss.backward()
            opt.step()
            train_loss += float(loss.detach())
        train_loss /= max(1, len(order))

        val_loss, val_auc = _evaluate_loss_auc(model, tensors, y, test_idx, loss_fn)
        history.append(MILEpochRecord(epoch, train_loss, val_loss, val_auc))
        logger.info("mil epoch %d: train %.4f val %.4f auc %.3f", epoch, train_loss, val_loss, val_auc)

    scores = _predict_scores(model, tensors, test_idx)
    metrics = compute_metrics(scores, y[test_idx])
    return MILResult(
        model=model,
        classes=classes,
        metrics=metrics,
        history=history,
        train_slides=[bags[i].slide_id for i in train_idx],
        test_slides=[bags[i].slide_id for i in test_idx],
        test_scores=scores,
        test_labels=y[test_idx],
    )


def _predict_scores(model, tensors, idx) -> np.ndarray:
    model.eval()
    rows = []
    with torch.no_grad():
        for i in idx:
            logits, _, _ = model(tensors[i])
            rows.append(torch.softmax(logits, dim=0).numpy())
    return np.asarray(rows)


def _evaluate_loss_auc(model, tensors, y, idx, loss_fn):
    model.eval()
    losses = []
    with torch.no_grad():
        for i in idx:
            logits, _, _ = model(tensors[i])
            losses.append(float(loss_fn(logits.unsqueeze(0), torch.tensor([y[i]]))))
    scores = _predict_scores(model, tensors, idx)
    try:
        auc = compute_metrics(scores, y[idx]).auc
    except ValueError:
        auc = float("nan")
    return float(np.mean(losses)) if losses else float("nan"), auc


def predict_slide(model: AttentionMILClassifier, bag: AttentionBag) -> tuple[np.ndarray, np.ndarray]:
    """Normalized class scores and the attention vector for one bag.

    Also stores both on the bag for downstream heatmap export.
    """
    model.eval()
    with torch.no_grad():
        logits, attention, _ = model(torch.from_numpy(bag.instances))
        scores = torch.softmax(logits, dim=0).numpy()
    bag.slide_scores = scores
    bag.attention = attention.numpy()
    return scores, bag.attention
