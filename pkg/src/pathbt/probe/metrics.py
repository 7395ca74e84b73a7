"""Classification metrics: top-1 accuracy, one-vs-rest AUC, macro F1."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


@dataclass
class MetricsRecord:
    top1_acc: float  # percent, in [0, 100]
    auc: float  # macro one-vs-rest, in [0, 1]
    f1_macro: float | None = None
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "top1_acc": self.top1_acc,
            "auc": self.auc,
            "f1_macro": self.f1_macro,
            "per_class": {str(k): list(v) for k, v in self.per_class.items()},
        }


def binary_auc(scores, positive_mask) -> float:
    """Rank-statistic AUC; tied scores contribute half a concordant pair."""
    scores = np.asarray(scores, dtype=np.float64)
    positive_mask = np.asarray(positive_mask, dtype=bool)
    n_pos = int(positive_mask.sum())
    n_neg = positive_mask.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("binary AUC needs both positive and negative samples")
    ranks = rankdata(scores)
    u = ranks[positive_mask].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def compute_metrics(scores, labels, with_f1: bool = True) -> MetricsRecord:
    """Metrics from an N x K score matrix and integer labels.

    The multiclass AUC is the unweighted mean of per-class one-vs-rest AUCs;
    classes absent from the labels are skipped.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 2:
        raise ValueError("scores must be an N x K matrix")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    n, k = scores.shape
    if k < 2:
        raise ValueError("need at least 2 classes")
    if labels.shape != (n,):
        raise ValueError("labels must align with score rows")

    pred = scores.argmax(axis=1)
    top1 = float((pred == labels).mean() * 100.0)

    aucs = []
    per_class = {}
    for c in range(k):
        positive = labels == c
        if positive.any() and (~positive).any():
            aucs.append(binary_auc(scores[:, c], positive))
        tp = int(((pred == c) & positive).sum())
        fp = int(((pred == c) & ~positive).sum())
        fn = int(((pred != c) & positive).sum())
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        per_class[c] = (precision, recall)
    if not aucs:
        raise ValueError("AUC undefined: labels contain a single class")
    auc = float(np.mean(aucs))

    f1 = None
    if with_f1:
        f1s = []
        for c, (precision, recall) in per_class.items():
            if (labels == c).any():
                denom = precision + recall
                f1s.append(2 * precision * recall / denom if denom else 0.0)
        f1 = float(np.mean(f1s))
    return MetricsRecord(top1_acc=top1, auc=auc, f1_macro=f1, per_class=per_class)


def confusion_matrix(scores, labels, k: int | None = None) -> np.ndarray:
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    k = k or scores.shape[1]
    pred = scores.argmax(axis=1)
    cm = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(labels, pred):
        cm[int(t), int(p)] += 1
    return cm


def roc_curve_points(scores, positive_mask) -> np.ndarray:
    """(fpr, tpr, threshold) rows swept over descending unique scores."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive_mask, dtype=bool)
    n_pos = max(1, int(positive.sum()))
    n_neg = max(1, int((~positive).sum()))
    rows = [(0.0, 0.0, np.inf)]
    for t in np.unique(scores)[::-1]:
        hit = scores >= t
        rows.append(((hit & ~positive).sum() / n_neg, (hit & positive).sum() / n_pos, t))
    return np.asarray(rows)
