"""Slide image access behind a small interface.

Synthetic slides are plain raster PNGs; a pyramidal backend can be plugged in
by implementing the same three methods.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .types import SlideManifest


class RasterSlideReader:
    """Reads a single-level raster slide (PNG/TIFF via PIL) as RGB uint8."""

    def __init__(self, manifest: SlideManifest, root: str | Path | None = None):
        self.manifest = manifest
        src = Path(manifest.image_source)
        if root is not None and not src.is_absolute():
            src = Path(root) / src
        if not src.exists():
            raise FileNotFoundError(f"slide image not found: {src}")
        self._image = np.asarray(Image.open(src).convert("RGB"))

    @property
    def dimensions(self) -> tuple[int, int]:
        """(width, height) at base level."""
        h, w = self._image.shape[:2]
        return w, h

    def read_region(self, x: int, y: int, w: int, h: int) -> np.ndarray:
        H, W = self._image.shape[:2]
        if x < 0 or y < 0 or x + w > W or y + h > H:
            raise ValueError(f"region ({x},{y},{w},{h}) outside slide bounds {W}x{H}")
        return self._image[y : y + h, x : x + w].copy()

    def thumbnail(self, downsample: float) -> np.ndarray:
        """Downsampled copy of the whole slide (area averaging)."""
        if downsample < 1:
            raise ValueError("downsample must be >= 1")
        h, w = self._image.shape[:2]
        tw = max(1, int(round(w / downsample)))
        th = max(1, int(round(h / downsample)))
        pil = Image.fromarray(self._image).resize((tw, th), Image.BILINEAR)
        return np.asarray(pil)


def open_slide(manifest: SlideManifest, root: str | Path | None = None) -> RasterSlideReader:
    return RasterSlideReader(manifest, root=root)
