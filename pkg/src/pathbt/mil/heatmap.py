"""Attention overlays on slide thumbnails, plus top-k evidence tiles."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .bags import AttentionBag

DEFAULT_DOWNSAMPLE = 32.0
DEFAULT_TOP_K = 6
RAMP_LOW = np.array([0, 0, 255], dtype=np.float64)  # blue
RAMP_HIGH = np.array([255, 0, 0], dtype=np.float64)  # red


def attention_color(value: float) -> np.ndarray:
    """Fixed blue-to-red ramp over [0, 1]."""
    v = float(np.clip(value, 0.0, 1.0))
    return (1.0 - v) * RAMP_LOW + v * RAMP_HIGH


def heatmap_export(
    bag: AttentionBag,
    thumbnail: np.ndarray,
    out_dir: str | Path,
    downsample: float = DEFAULT_DOWNSAMPLE,
    top_k: int = DEFAULT_TOP_K,
    tile_images=None,
    alpha: float = 0.5,
) -> dict:
    """Write the attention overlay PNG, a per-tile CSV, and top-k tile PNGs.

    Attention is normalized by its maximum before the color ramp so the
    strongest tile is fully red. Raises when a tile footprint falls outside
    the thumbnail after downsampling.
    """
    if bag.attention is None:
        raise ValueError("bag has no attention; run predict_slide first")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    thumb = np.asarray(thumbnail).astype(np.float64)
    th, tw = thumb.shape[:2]

    attention = np.asarray(bag.attention, dtype=np.float64)
    peak = attention.max() if attention.size else 1.0
    scaled = attention / peak if peak > 0 else attention

    overlay = thumb.copy()
    for i, ((x, y, side), att) in enumerate(zip(bag.tile_coords, scaled)):
        x0 = int(np.floor(x / downsample))
        y0 = int(np.floor(y / downsample))
        x1 = int(np.ceil((x + side) / downsample))
        y1 = int(np.ceil((y + side) / downsample))
        if x0 < 0 or y0 < 0 or x1 > tw or y1 > th:
            raise ValueError(
                f"tile {i} at ({x},{y},side={side}) maps outside thumbnail {tw}x{th}"
            )
        if att <= 0:
            continue  # zero-attention tiles stay unpainted
        color = attention_color(att)
        overlay[y0:y1, x0:x1] = (1 - alpha) * overlay[y0:y1, x0:x1] + alpha * color

    overlay_path = out_dir / f"{bag.slide_id}_heatmap.png"
    Image.fromarray(np.clip(np.rint(overlay), 0, 255).astype(np.uint8)).save(overlay_path)

    csv_path = out_dir / f"{bag.slide_id}_attention.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "y", "side", "attention"])
        for (x, y, side), att in zip(bag.tile_coords, attention):
            writer.writerow([x, y, side, float(att)])

    top_paths = []
    if tile_images is not None:
        k = min(top_k, len(attention))
        ranked = np.argsort(attention)[::-1][:k]
        for rank, idx in enumerate(ranked):
            path = out_dir / f"{bag.slide_id}_top{rank + 1}.png"
            Image.fromarray(np.asarray(tile_images[idx])).save(path)
            top_paths.append(str(path))

    meta = {
        "slide_id": bag.slide_id,
        "downsample": downsample,
        "alpha": alpha,
        "color_ramp": {"low": RAMP_LOW.tolist(), "high": RAMP_HIGH.tolist()},
        "overlay": str(overlay_path),
        "csv": str(csv_path),
        "top_tiles": top_paths,
    }
    with open(out_dir / f"{bag.slide_id}_heatmap.json", "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2)
    return meta
