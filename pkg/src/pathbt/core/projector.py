"""Projection head mapping encoder features into the loss space."""

from __future__ import annotations

import torch.nn as nn


def build_projector(in_dim: int, dims) -> nn.Sequential:
    """MLP with linear/batch-norm/ReLU blocks; the last layer is linear only."""
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("projector dims must be nonempty")
    layers = []
    prev = in_dim
    for d in dims[:-1]:
        layers += [nn.Linear(prev, d, bias=False), nn.BatchNorm1d(d), nn.ReLU(inplace=True)]
        prev = d
    layers.append(nn.Linear(prev, dims[-1]))
    return nn.Sequential(*layers)
