"""Redundancy-reduction objective: standardize, cross-correlate, penalize.

The loss drives the cross-correlation matrix of two standardized embedding
batches toward the identity: squared deviation of the diagonal from one plus
a weighted sum of squared off-diagonal entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

DEFAULT_EPS = 1e-5


@dataclass
class EmbeddingBatch:
    """Standardized N x D embeddings with the statistics that produced them."""

    values: torch.Tensor
    mean: torch.Tensor
    std: torch.Tensor

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass
class CrossCorrelation:
    """D x D correlation matrix between two standardized batches."""

    matrix: torch.Tensor

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class BTLossTerms:
    total: torch.Tensor
    invariance: torch.Tensor
    redundancy: torch.Tensor

    def detach_floats(self) -> tuple[float, float, float]:
        return (
            float(self.total.detach()),
            float(self.invariance.detach()),
            float(self.redundancy.detach()),
        )


def _as_2d_tensor(raw) -> torch.Tensor:
    t = torch.as_tensor(raw)
    if t.ndim != 2:
        raise ValueError(f"expected an N x D matrix, got shape {tuple(t.shape)}")
    return t


def standardize(raw, eps: float = DEFAULT_EPS) -> EmbeddingBatch:
    """Column-wise (x - mean) / max(std, eps) with population statistics.

    Degenerate columns (std below eps) come out as zeros. The stored mean and
    std are the pre-standardization statistics.
    """
    t = _as_2d_tensor(raw)
    if t.shape[0] < 2:
        raise ValueError(f"standardize needs at least 2 rows, got {t.shape[0]}")
    mean = t.mean(dim=0)
    std = t.std(dim=0, unbiased=False)
    values = (t - mean) / std.clamp_min(eps)
    return EmbeddingBatch(values=values, mean=mean, std=std)


def cross_correlation(a: EmbeddingBatch, b: EmbeddingBatch) -> CrossCorrelation:
    """C = a^T b / N over standardized values."""
    if a.values.shape != b.values.shape:
        raise ValueError(
            f"embedding shapes differ: {tuple(a.values.shape)} vs {tuple(b.values.shape)}"
        )
    n = a.values.shape[0]
    return CrossCorrelation(matrix=a.values.T @ b.values / n)


def bt_loss(c: CrossCorrelation | torch.Tensor, lam: float) -> BTLossTerms:
    """Invariance plus lambda-weighted redundancy of a correlation matrix."""
    matrix = c.matrix if isinstance(c, CrossCorrelation) else torch.as_tensor(c)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"correlation matrix must be square, got {tuple(matrix.shape)}")
    diag = torch.diagonal(matrix)
    invariance = ((1.0 - diag) ** 2).sum()
    off = matrix - torch.diag_embed(diag)
    redundancy = (off**2).sum()
    return BTLossTerms(total=invariance + lam * redundancy, invariance=invariance, redundancy=redundancy)


def bt_loss_from_raw(raw_a, raw_b, lam: float, eps: float = DEFAULT_EPS) -> BTLossTerms:
    """Full objective from raw (pre-standardization) embedding batches."""
    a = standardize(raw_a, eps)
    b = standardize(raw_b, eps)
    return bt_loss(cross_correlation(a, b), lam)
