"""Global grayscale thresholding by between-class variance maximization."""

from __future__ import annotations

import numpy as np

from .types import TissueMask

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


def otsu_threshold(histogram) -> int:
    """Threshold t maximizing between-class variance of the 256-bin histogram.

    The low class is {v : v < t}, the high class {v : v >= t}; only splits with
    both classes populated are considered, ties resolve to the smallest t.
    Comparisons use exact integer arithmetic so the argmax is reproducible.
    A single-bin histogram has no two-class split and returns that bin.
    """
    h = np.asarray(histogram)
    if h.shape != (256,):
        raise ValueError(f"histogram must have 256 bins, got shape {h.shape}")
    if np.any(h < 0):
        raise ValueError("histogram counts must be non-negative")
    counts = [int(c) for c in h]
    total = sum(counts)
    if total == 0:
        raise ValueError("empty histogram")

    nonzero = [v for v, c in enumerate(counts) if c > 0]
    if len(nonzero) == 1:
        return nonzero[0]

    total_sum = sum(v * c for v, c in enumerate(counts))
    best_t = -1
    best_num = 0  # (S0*w1 - S1*w0)^2, integer
    best_den = 1  # w0*w1, integer
    w0 = 0
    s0 = 0
    for t in range(256):
        # classes for threshold t: [0, t) vs [t, 255]
        if t > 0:
            w0 += counts[t - 1]
            s0 += (t - 1) * counts[t - 1]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        num = (s0 * w1 - (total_sum - s0) * w0) ** 2
        # strict > keeps the smallest t on ties
        if best_t < 0 or num * best_den > best_num * w0 * w1:
            best_t, best_num, best_den = t, num, w0 * w1
    return best_t


def rgb_to_gray(image: np.ndarray) -> np.ndarray:
    """Rounded luminance of an 8-bit RGB image, as uint8."""
    gray = np.rint(image.astype(np.float64) @ GRAY_WEIGHTS)
    return np.clip(gray, 0, 255).astype(np.uint8)


def tissue_mask(thumbnail: np.ndarray, downsample: float) -> TissueMask:
    """Binary tissue mask of a slide thumbnail; tissue is darker than glass."""
    thumbnail = np.asarray(thumbnail)
    if thumbnail.ndim != 3 or thumbnail.shape[2] != 3:
        raise ValueError(f"expected HxWx3 image, got shape {thumbnail.shape}")
    if thumbnail.shape[0] < 8 or thumbnail.shape[1] < 8:
        raise ValueError("thumbnail must be at least 8x8")
    gray = rgb_to_gray(thumbnail)
    hist = np.bincount(gray.ravel(), minlength=256)
    t = otsu_threshold(hist)
    return TissueMask(grid=gray < t, threshold=t, downsample=downsample)
