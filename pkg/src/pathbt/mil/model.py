"""Gated-attention pooling and the single-branch bag classifier."""

from __future__ import annotations

import torch
import torch.nn as nn


class GatedAttentionPool(nn.Module):
    """Instance weights from a tanh/sigmoid gate pair, softmax-normalized.

    score_m = w^T (tanh(V h_m) * sigmoid(U h_m)); attention = softmax(score).
    """

    def __init__(self, in_dim: int, hidden_dim: int = 128):
        super().__init__()
        self.gate_v = nn.Linear(in_dim, hidden_dim)
        self.gate_u = nn.Linear(in_dim, hidden_dim)
        self.score = nn.Linear(hidden_dim, 1)

    def forward(self, instances: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """instances: M x F. Returns (pooled F-vector, attention M-vector)."""
        if instances.ndim != 2 or instances.shape[0] < 1:
            raise ValueError("instances must be a nonempty M x F matrix")
        gated = torch.tanh(self.gate_v(instances)) * torch.sigmoid(self.gate_u(instances))
        attention = torch.softmax(self.score(gated).squeeze(-1), dim=0)
        pooled = attention @ instances
        return pooled, attention


class AttentionMILClassifier(nn.Module):
    """Project instances, pool by gated attention, classify the bag."""

    def __init__(self, in_dim: int, n_classes: int, hidden_dim: int = 128, attention_hidden: int = 128):
        super().__init__()
        self.embed = nn.Sequential(nn.Linear(in_dim, hidden_dim), nn.ReLU(inplace=True))
        self.pool = GatedAttentionPool(hidden_dim, attention_hidden)
        self.classifier = nn.Linear(hidden_dim, n_classes)
        # instance head scores each tile against the bag classes (optional loss)
        self.instance_head = nn.Linear(hidden_dim, n_classes)

    def forward(self, instances: torch.Tensor):
        """instances: M x F. Returns (logits K, attention M, instance logits M x K)."""
        h = self.embed(instances)
        pooled, attention = self.pool(h)
        return self.classifier(pooled), attention, self.instance_head(h)
