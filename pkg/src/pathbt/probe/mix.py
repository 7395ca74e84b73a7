"""Evaluation-phase sample mixing: convex image blends and patch pasting.

These run only while training the linear head on labeled data; the
pretraining stage never sees them.
"""

from __future__ import annotations

import numpy as np
import torch


def mixup_batch(inputs: torch.Tensor, onehot: torch.Tensor, alpha: float, rng: np.random.Generator):
    """Pairwise convex combination of samples and their one-hot labels."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    lam = float(rng.beta(alpha, alpha))
    perm = torch.from_numpy(rng.permutation(inputs.shape[0]))
    mixed = lam * inputs + (1.0 - lam) * inputs[perm]
    labels = lam * onehot + (1.0 - lam) * onehot[perm]
    return mixed, labels


def cutmix_batch(images: torch.Tensor, onehot: torch.Tensor, alpha: float, rng: np.random.Generator):
    """Paste a random rectangle between paired images; labels mix by area.

    Expects NCHW image tensors. A zero-area rectangle leaves images and
    labels unchanged.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if images.ndim != 4:
        raise ValueError("cutmix needs NCHW image tensors")
    n, _, h, w = images.shape
    lam = float(rng.beta(alpha, alpha))
    cut_h = int(round(h * np.sqrt(1.0 - lam)))
    cut_w = int(round(w * np.sqrt(1.0 - lam)))
    perm = torch.from_numpy(rng.permutation(n))
    if cut_h == 0 or cut_w == 0:
        return images.clone(), onehot.clone()
    y0 = int(rng.integers(0, h - cut_h + 1))
    x0 = int(rng.integers(0, w - cut_w + 1))
    mixed = images.clone()
    mixed[:, :, y0 : y0 + cut_h, x0 : x0 + cut_w] = images[perm][:, :, y0 : y0 + cut_h, x0 : x0 + cut_w]
    area_frac = (cut_h * cut_w) / (h * w)
    labels = (1.0 - area_frac) * onehot + area_frac * onehot[perm]
    return mixed, labels


def eval_phase_mix(mode: str, alpha: float = 1.0):
    """Mixing callback for ``train_probe``; mode is 'mixup' or 'cutmix'."""
    if mode not in ("mixup", "cutmix"):
        raise ValueError(f"unknown mix mode {mode!r}")
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def fn(inputs: torch.Tensor, onehot: torch.Tensor, rng: np.random.Generator):
        if mode == "mixup":
            return mixup_batch(inputs, onehot, alpha, rng)
        return cutmix_batch(inputs, onehot, alpha, rng)

    return fn
