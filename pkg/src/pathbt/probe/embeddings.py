"""Deterministic feature extraction from a frozen encoder."""

from __future__ import annotations

import hashlib

import numpy as np
import torch

from ..augment import kernels


def encoder_checksum(encoder: torch.nn.Module) -> str:
    """Digest of all parameters and buffers, for frozen-weights assertions."""
    h = hashlib.sha256()
    for name, tensor in sorted(encoder.state_dict().items()):
        h.update(name.encode())
        h.update(tensor.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def extract_embeddings(
    encoder: torch.nn.Module,
    images,
    input_size: int | None = None,
    batch_size: int = 256,
    mean=kernels.IMAGENET_MEAN,
    std=kernels.IMAGENET_STD,
) -> np.ndarray:
    """Embed tiles with resize + normalize only; rows follow input order."""
    encoder.eval()
    feats = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            chunk = images[start : start + batch_size]
            arrs = []
            for img in chunk:
                if input_size is not None:
                    img = kernels.resize(img, input_size)
                arrs.append(kernels.normalize(img, mean, std).transpose(2, 0, 1))
            x = torch.from_numpy(np.stack(arrs))
            feats.append(encoder(x).cpu().numpy())
    if not feats:
        return np.zeros((0, 0), dtype=np.float32)
    return np.concatenate(feats, axis=0)
