"""Image transform kernels on 8-bit RGB arrays.

Every kernel is a pure function; stochastic variants take an explicit
``numpy.random.Generator`` so repeated calls under the same seed are
bit-identical. Geometric transforms keep the input size and fill
out-of-bounds samples by reflection.
"""

from __future__ import annotations

import math

import cv2
import numpy as np
from matplotlib.colors import hsv_to_rgb, rgb_to_hsv
from scipy import ndimage

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float32)
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def _check_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError(f"expected uint8 HxWx3 image, got {image.dtype} {image.shape}")
    return image


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def hflip(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(_check_image(image)[:, ::-1])


def vflip(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(_check_image(image)[::-1])


def solarize(image: np.ndarray, threshold: int) -> np.ndarray:
    """Invert every pixel value at or above the threshold."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"solarize threshold outside [0, 255]: {threshold}")
    image = _check_image(image)
    return np.where(image >= threshold, 255 - image, image)


def posterize(image: np.ndarray, bits: int) -> np.ndarray:
    """Keep the top ``bits`` bits of each channel value."""
    if not 1 <= bits <= 8:
        raise ValueError(f"posterize bits outside [1, 8]: {bits}")
    image = _check_image(image)
    mask = np.uint8(0xFF & ~((1 << (8 - bits)) - 1))
    return image & mask


def grayscale(image: np.ndarray) -> np.ndarray:
    """Replicate rounded luminance across the three channels."""
    image = _check_image(image)
    lum = _to_uint8(image.astype(np.float32) @ GRAY_WEIGHTS)
    return np.repeat(lum[..., None], 3, axis=2)


def gaussian_blur(image: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("blur sigma must be positive")
    image = _check_image(image)
    blurred = ndimage.gaussian_filter(image.astype(np.float32), sigma=(sigma, sigma, 0), mode="reflect")
    return _to_uint8(blurred)


def _warp(image: np.ndarray, degrees: float, translate_px: tuple[float, float]) -> np.ndarray:
    """Rotate about the center then translate, sampling with reflection."""
    image = _check_image(image)
    h, w = image.shape[:2]
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    tx, ty = translate_px
    # output(p) = input(R(p - c - t) + c), expressed for (row, col) sampling
    matrix = np.array([[cos_t, -sin_t, 0.0], [sin_t, cos_t, 0.0], [0.0, 0.0, 1.0]])
    center = np.array([cy, cx, 0.0])
    shift = np.array([ty, tx, 0.0])
    offset = center - matrix @ (center + shift)
    warped = ndimage.affine_transform(
        image.astype(np.float32), matrix, offset=offset, order=1, mode="reflect"
    )
    return _to_uint8(warped)


def rotate(image: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate about the image center, same output size, reflection fill."""
    return _warp(image, degrees, (0.0, 0.0))


def affine(image: np.ndarray, degrees: float, translate_px: tuple[float, float]) -> np.ndarray:
    """Rotation composed with a pixel translation, reflection fill."""
    return _warp(image, degrees, translate_px)


def adjust_brightness(image: np.ndarray, factor: float) -> np.ndarray:
    return _to_uint8(_check_image(image).astype(np.float32) * factor)


def adjust_contrast(image: np.ndarray, factor: float) -> np.ndarray:
    image = _check_image(image)
    f = image.astype(np.float32)
    mean = float((f @ GRAY_WEIGHTS).mean())
    return _to_uint8((1.0 - factor) * mean + factor * f)


def adjust_saturation(image: np.ndarray, factor: float) -> np.ndarray:
    image = _check_image(image)
    f = image.astype(np.float32)
    gray = (f @ GRAY_WEIGHTS)[..., None]
    return _to_uint8((1.0 - factor) * gray + factor * f)


def adjust_hue(image: np.ndarray, shift: float) -> np.ndarray:
    """Rotate hue by ``shift`` (fraction of a full turn, in [-0.5, 0.5])."""
    if not -0.5 <= shift <= 0.5:
        raise ValueError(f"hue shift outside [-0.5, 0.5]: {shift}")
    image = _check_image(image)
    hsv = rgb_to_hsv(image.astype(np.float32) / 255.0)
    hsv[..., 0] = (hsv[..., 0] + shift) % 1.0
    return _to_uint8(hsv_to_rgb(hsv) * 255.0)


def color_jitter(
    image: np.ndarray,
    rng: np.random.Generator,
    brightness: float = 0.0,
    contrast: float = 0.0,
    saturation: float = 0.0,
    hue: float = 0.0,
) -> np.ndarray:
    """Random photometric jitter; zero strengths leave the image untouched."""
    image = _check_image(image)
    if brightness > 0:
        image = adjust_brightness(image, rng.uniform(max(0.0, 1 - brightness), 1 + brightness))
    if contrast > 0:
        image = adjust_contrast(image, rng.uniform(max(0.0, 1 - contrast), 1 + contrast))
    if saturation > 0:
        image = adjust_saturation(image, rng.uniform(max(0.0, 1 - saturation), 1 + saturation))
    if hue > 0:
        image = adjust_hue(image, rng.uniform(-hue, hue))
    return image


def crop_resize(
    image: np.ndarray,
    rng: np.random.Generator,
    out_size: int,
    scale_range: tuple[float, float] = (0.08, 1.0),
) -> np.ndarray:
    """Random area-scaled crop resized to ``out_size`` (bilinear)."""
    lo, hi = scale_range
    if not (0.0 < lo <= hi <= 1.0):
        raise ValueError(f"scale_range must lie in (0, 1], got {scale_range}")
    image = _check_image(image)
    h, w = image.shape[:2]
    side_frac = math.sqrt(rng.uniform(lo, hi))
    ch = max(1, int(round(h * side_frac)))
    cw = max(1, int(round(w * side_frac)))
    y0 = int(rng.integers(0, h - ch + 1))
    x0 = int(rng.integers(0, w - cw + 1))
    crop = image[y0 : y0 + ch, x0 : x0 + cw]
    if crop.shape[0] == out_size and crop.shape[1] == out_size:
        return np.ascontiguousarray(crop)
    return cv2.resize(crop, (out_size, out_size), interpolation=cv2.INTER_LINEAR)


def resize(image: np.ndarray, out_size: int) -> np.ndarray:
    image = _check_image(image)
    if image.shape[0] == out_size and image.shape[1] == out_size:
        return image
    return cv2.resize(image, (out_size, out_size), interpolation=cv2.INTER_LINEAR)


def normalize(image: np.ndarray, mean=IMAGENET_MEAN, std=IMAGENET_STD) -> np.ndarray:
    """Map 8-bit values to channel-standardized float32: (v/255 - mean)/std."""
    image = _check_image(image)
    mean = np.asarray(mean, dtype=np.float32)
    std = np.asarray(std, dtype=np.float32)
    if np.any(std == 0):
        raise ValueError("normalize std must be nonzero")
    return (image.astype(np.float32) / 255.0 - mean) / std
