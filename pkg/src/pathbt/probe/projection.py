"""Linear 2-D projection of embeddings for qualitative inspection."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def project_2d(embeddings, labels=None, out_prefix: str | Path | None = None) -> np.ndarray:
    """Top-2 principal components of the embeddings, N x 2.

    Deterministic: each component's sign makes its largest-magnitude loading
    positive. With ``out_prefix`` set, writes ``<prefix>.csv`` and a
    class-colored ``<prefix>.png`` scatter (metadata row marks the method as
    a linear principal-component projection).
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise ValueError("project_2d needs an N x D matrix with N >= 3")
    centered = x - x.mean(axis=0, keepdims=True)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2]
    for i in range(components.shape[0]):
        j = int(np.abs(components[i]).argmax())
        if components[i, j] < 0:
            components[i] = -components[i]
    coords = centered @ components.T

    if out_prefix is not None:
        out_prefix = Path(out_prefix)
        out_prefix.parent.mkdir(parents=True, exist_ok=True)
        with open(out_prefix.with_suffix(".csv"), "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["# method=linear-pca"])
            writer.writerow(["pc1", "pc2", "label"])
            for i, (a, b) in enumerate(coords):
                writer.writerow([a, b, labels[i] if labels is not None else ""])
        _plot(coords, labels, out_prefix.with_suffix(".png"))
    return coords


def _plot(coords: np.ndarray, labels, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 5))
    if labels is None:
        ax.scatter(coords[:, 0], coords[:, 1], s=8)
    else:
        labels = np.asarray(labels)
        for c in np.unique(labels):
            sel = labels == c
            ax.scatter(coords[sel, 0], coords[sel, 1], s=8, label=str(c))
        ax.legend(fontsize=8)
    ax.set_xlabel("pc1")
    ax.set_ylabel("pc2")
    ax.set_title("linear 2-D projection of embeddings")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
