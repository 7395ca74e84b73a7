"""Lightweight CNN separating tissue tiles from background and artifacts.

Acts as a second filter after the grayscale tissue mask: tiles that survive
thresholding but contain glass, blur, or pen marks get a low tissue score.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import cv2
import numpy as np
import torch
import torch.nn as nn

logger = logging.getLogger(__name__)

FILTER_INPUT_SIZE = 96


class ArtifactFilterNet(nn.Module):
    """Three conv+ReLU stages with stride-2 pooling, one FC stage to 2 classes."""

    def __init__(self, widths: tuple[int, int, int] = (16, 32, 64), input_size: int = FILTER_INPUT_SIZE):
        super().__init__()
        layers = []
        in_c = 3
        for w in widths:
            layers += [nn.Conv2d(in_c, w, kernel_size=3, padding=1), nn.ReLU(inplace=True), nn.MaxPool2d(2)]
            in_c = w
        self.features = nn.Sequential(*layers)
        spatial = input_size // 2 ** len(widths)
        self.classifier = nn.Linear(widths[-1] * spatial * spatial, 2)
        self.input_size = input_size

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.features(x)
        return self.classifier(h.flatten(1))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters() if p.requires_grad)


@dataclass
class ArtifactFilterModel:
    """Trained filter plus its held-out accuracy report."""

    net: ArtifactFilterNet
    holdout_accuracy: float
    parameter_count: int

    def scores(self, tiles: list[np.ndarray], batch_size: int = 128) -> np.ndarray:
        """Tissue probability per tile (softmax class 1 = tissue)."""
        self.net.eval()
        out = np.empty(len(tiles), dtype=np.float64)
        with torch.no_grad():
            for start in range(0, len(tiles), batch_size):
                batch = tiles[start : start + batch_size]
                x = torch.from_numpy(_prepare_batch(batch, self.net.input_size))
                probs = torch.softmax(self.net(x), dim=1)[:, 1]
                out[start : start + len(batch)] = probs.numpy()
        return out


def _prepare_batch(tiles, input_size: int) -> np.ndarray:
    arr = np.empty((len(tiles), 3, input_size, input_size), dtype=np.float32)
    for i, tile in enumerate(tiles):
        img = tile
        if img.shape[0] != input_size or img.shape[1] != input_size:
            img = cv2.resize(img, (input_size, input_size), interpolation=cv2.INTER_LINEAR)
        arr[i] = (img.astype(np.float32) / 255.0).transpose(2, 0, 1)
    return arr


@dataclass
class ArtifactFilterConfig:
    epochs: int = 8
    batch_size: int = 32
    lr: float = 2e-3
    holdout_fraction: float = 0.2
    seed: int = 0


def train_artifact_filter(
    images: list[np.ndarray], labels, config: ArtifactFilterConfig | None = None
) -> ArtifactFilterModel:
    """Train the tissue-vs-artifact filter; label 1 = tissue, 0 = artifact."""
    config = config or ArtifactFilterConfig()
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("artifact filter training needs both tissue and artifact examples")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(images))
    n_holdout = max(1, int(round(config.holdout_fraction * len(images))))
    holdout_idx, train_idx = order[:n_holdout], order[n_holdout:]

    torch.manual_seed(config.seed)
    net = ArtifactFilterNet()
    opt = torch.optim.Adam(net.parameters(), lr=config.lr)
    loss_fn = nn.CrossEntropyLoss()

    net.train()
    for epoch in range(config.epochs):
        shuffled = rng.permutation(train_idx)
        for start in range(0, len(shuffled), config.batch_size):
            idx = shuffled[start : start + config.batch_size]
            x = torch.from_numpy(_prepare_batch([images[i] for i in idx], net.input_size))
            y = torch.from_numpy(labels[idx])
            opt.zero_grad()
            loss = loss_fn(net(x), y)
            loss.backward()
            opt.step()

    model = ArtifactFilterModel(net=net, holdout_accuracy=0.0, parameter_count=net.parameter_count())
    scores = model.scores([images[i] for i in holdout_idx])
    pred = (scores >= 0.5).astype(np.int64)
    model.holdout_accuracy = float((pred == labels[holdout_idx]).mean())
    logger.info(
        "artifact filter: %d trainable parameters, held-out accuracy %.3f",
        model.parameter_count,
        model.holdout_accuracy,
    )
    return model


def filter_tiles(model: ArtifactFilterModel, tiles, images, threshold: float = 0.5):
    """Score tiles and keep those with tissue_score >= threshold.

    Scores are recorded on every input record; the returned list is the kept
    subset (same record objects), preserving input order.
    """
    if len(tiles) != len(images):
        raise ValueError("tiles and images must align")
    if not tiles:
        return []
    scores = model.scores(images)
    kept = []
    for tile, score in zip(tiles, scores):
        tile.tissue_score = float(score)
        if score >= threshold:
            kept.append(tile)
    return kept
