"""Gaussian smoothing and Canny edge detection for composed images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class EdgeParams:
    """Canny settings: blur sigma, high threshold (fraction of max gradient
    magnitude), and low threshold as a fraction of the high one."""

    sigma: float = 1.4
    high_threshold: float = 0.7
    low_ratio: float = 0.4

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 < self.high_threshold <= 1:
            raise ValueError(f"high_threshold must be in (0, 1], got {self.high_threshold}")
        if not 0 < self.low_ratio < 1:
            raise ValueError(f"low_ratio must be in (0, 1), got {self.low_ratio}")


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian, radius ceil(3*sigma)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(image: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian convolution with reflected borders."""
    kernel = gaussian_kernel_1d(sigma)
    image = np.asarray(image, dtype=np.float64)
    out = ndimage.convolve1d(image, kernel, axis=0, mode="reflect")
    return ndimage.convolve1d(out, kernel, axis=1, mode="reflect")


def to_luminance(image: np.ndarray) -> np.ndarray:
    """Reduce an (H, W, 3) RGB image to luminance; grayscale passes through."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    if image.ndim == 3 and image.shape[2] == 3:
        wr, wg, wb = LUMA_WEIGHTS
        return wr * image[..., 0] + wg * image[..., 1] + wb * image[..., 2]
    raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {image.shape}")


def sobel_gradients(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel derivatives (gx, gy) with reflected borders."""
    image = np.asarray(image, dtype=np.float64)
    gx = ndimage.sobel(image, axis=1, mode="reflect")
    gy = ndimage.sobel(image, axis=0, mode="reflect")
    return gx, gy


def _nonmax_suppress(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that are local maxima along the gradient direction,
    quantized to 0/45/90/135 degrees. Plateaus survive (>= comparison)."""
    angle = np.rad2deg(np.arctan2(gy, gx))
    angle[angle < 0] += 180.0

    h, w = magnitude.shape
    padded = np.zeros((h + 2, w + 2), dtype=magnitude.dtype)
    padded[1:-1, 1:-1] = magnitude

    # neighbor offsets per quantized direction (rows grow downward, so a
    # 45 deg gradient points down-right); both +/- offsets are compared
    sector = (((angle + 22.5) // 45.0).astype(np.int8)) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros_like(magnitude, dtype=bool)
    for s, (dy, dx) in offsets.items():
        fwd = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        bwd = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        mask = sector == s
        keep |= mask & (magnitude >= fwd) & (magnitude >= bwd)
    return keep & (magnitude > 0)


def canny_edges(image: np.ndarray, params: EdgeParams = EdgeParams()) -> np.ndarray:
    """Binary edge map via blur, Sobel, non-maximum suppression, hysteresis.

    RGB input is reduced to luminance first. The high threshold is
    params.high_threshold times the maximum gradient magnitude; strong seeds
    grow through 8-connected pixels above low_ratio * high.
    """
    gray = to_luminance(image)
    if gray.size == 0:
        raise ValueError("empty image")
    blurred = gaussian_blur(gray, params.sigma)
    gx, gy = sobel_gradients(blurred)
    magnitude = np.hypot(gx, gy)

    max_mag = magnitude.max()
    if max_mag == 0.0:
        return np.zeros_like(gray, dtype=np.uint8)

    high = params.high_threshold * max_mag
    low = params.low_ratio * high

    thinned = _nonmax_suppress(magnitude, gx, gy)
    strong = thinned & (magnitude >= high)
    weak = thinned & (magnitude >= low)

    # hysteresis: keep weak components that contain at least one strong pixel
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=np.int8))
    if n == 0:
        return np.zeros_like(gray, dtype=np.uint8)
    strong_labels = np.unique(labels[strong])
    strong_labels = strong_labels[strong_labels != 0]
    edges = np.isin(labels, strong_labels) & weak
    return edges.astype(np.uint8)
