"""Synthetic dynamic-speckle stacks with per-pixel ground-truth activity.

The generative model is a complex circular-Gaussian field evolving as a
per-pixel AR(1) process: rho = 1 pixels never change, rho = 0 pixels fully
decorrelate every frame. A Gaussian low-pass on the complex field sets the
speckle grain; intensity is the squared magnitude, scaled to a target mean
and quantized to 8 bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .descriptors import ActivityMap
from .edges import gaussian_blur, gaussian_kernel_1d
from .errors import DimensionMismatchError
from .stack_io import FrameStack, StackMetadata

GLYPH_KINDS = ("disk", "rect", "stroke")


@dataclass
class ActivityField:
    """Ground truth: per-pixel temporal correlation coefficient in [0, 1]."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        self.rho = np.asarray(self.rho, dtype=np.float64)
        if self.rho.ndim != 2 or self.rho.size == 0:
            raise ValueError(f"rho must be a non-empty 2-D array, got shape {self.rho.shape}")
        if self.rho.min() < 0.0 or self.rho.max() > 1.0:
            raise ValueError("rho values must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.rho.shape[1]

    @property
    def height(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class SimulationParams:
    frames: int
    grain_size: float = 2.0
    seed: int = 0
    mean_intensity: float = 100.0

    def __post_init__(self) -> None:
        if self.frames < 2:
            raise ValueError(f"need at least 2 frames, got {self.frames}")
        if self.grain_size < 1:
            raise ValueError(f"grain_size must be >= 1 pixel, got {self.grain_size}")
        if not 0.0 < self.mean_intensity < 255.0:
            raise ValueError(f"mean_intensity must be in (0, 255), got {self.mean_intensity}")


def intensity_frames(field: ActivityField, params: SimulationParams):
    """Yield pre-quantization intensity frames (float64, mean ~ mean_intensity).

    The complex field starts in its stationary distribution and evolves per
    pixel as E_k = rho * E_{k-1} + sqrt(1 - rho^2) * eta_k with fresh unit
    circular-Gaussian noise eta_k drawn from a counter-based stream keyed by
    the seed, so identical inputs always replay identical frames.
    """
    rho = field.rho
    h, w = rho.shape
    rng = np.random.Generator(np.random.Philox(key=params.seed))
    decor = np.sqrt(1.0 - rho * rho)
    sigma = params.grain_size / 2.0

    # expected |E|^2 after smoothing a unit-variance field (interior pixels)
    k1 = gaussian_kernel_1d(sigma)
    scale = params.mean_intensity / float(np.sum(k1 * k1) ** 2)

    def draw_noise() -> np.ndarray:
        re = rng.standard_normal((h, w))
        im = rng.standard_normal((h, w))
        return (re + 1j * im) / np.sqrt(2.0)

    e_field = draw_noise()
    for k in range(params.frames):
        if k > 0:
            e_field = rho * e_field + decor * draw_noise()
        smoothed = gaussian_blur(e_field.real, sigma) + 1j * gaussian_blur(e_field.imag, sigma)
        yield scale * (smoothed.real**2 + smoothed.imag**2)


def generate_stack(
    field: ActivityField, params: SimulationParams
) -> tuple[FrameStack, ActivityField]:
    """Simulate a speckle stack over the given activity field.

    Returns the 8-bit stack (round-half-up quantization, saturating at 255)
    and echoes the ground-truth field.
    """
    frames = np.empty((params.frames, field.height, field.width), dtype=np.uint8)
    for k, intensity in enumerate(intensity_frames(field, params)):
        frames[k] = np.clip(np.floor(intensity + 0.5), 0.0, 255.0).astype(np.uint8)
    stack = FrameStack(frames, StackMetadata(label=f"sim-seed{params.seed}"))
    return stack, field


def uniform_field(width: int, height: int, rho: float) -> ActivityField:
    return ActivityField(np.full((height, width), rho, dtype=np.float64))


def glyph_field(
    kind: str,
    width: int,
    height: int,
    rho_background: float = 0.99,
    rho_glyph: float = 0.5,
) -> ActivityField:
    """Hidden-content fixture: a disk, rectangle, or diagonal stroke whose
    pixels decorrelate faster (or slower) than the background."""
    if kind not in GLYPH_KINDS:
        raise ValueError(f"unknown glyph {kind!r}, expected one of {GLYPH_KINDS}")
    yy, xx = np.mgrid[0:height, 0:width]
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    if kind == "disk":
        r = min(width, height) / 4.0
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    elif kind == "rect":
        mask = (np.abs(yy - cy) <= height / 4.0) & (np.abs(xx - cx) <= width / 4.0)
    else:
        # diagonal stroke: distance to the main-diagonal segment
        t = np.clip(((xx - width / 4.0) + (yy - height / 4.0)) / 2.0, 0, min(width, height) / 2.0)
        px, py = width / 4.0 + t, height / 4.0 + t
        dist = np.hypot(xx - px, yy - py)
        mask = dist <= max(1.5, min(width, height) / 24.0)
    rho = np.full((height, width), rho_background, dtype=np.float64)
    rho[mask] = rho_glyph
    return ActivityField(rho)


def separation_score(
    activity: ActivityMap | np.ndarray, truth: ActivityField, threshold_rho: float
) -> float:
    """ROC AUC of the map as a classifier of active (rho < threshold) pixels.

    Computed from the Mann-Whitney rank statistic with midranks for ties, so
    a constant map scores exactly 0.5.
    """
    values = activity.values if isinstance(activity, ActivityMap) else np.asarray(activity)
    if values.shape != truth.rho.shape:
        raise DimensionMismatchError(
            f"map is {values.shape}, truth is {truth.rho.shape}"
        )
    active = (truth.rho < threshold_rho).ravel()
    n_active = int(active.sum())
    n_inactive = active.size - n_active
    if n_active == 0 or n_inactive == 0:
        raise ValueError(f"threshold_rho={threshold_rho} leaves an empty class")
    ranks = rankdata(values.ravel(), method="average")
    rank_sum = float(ranks[active].sum())
    u_stat = rank_sum - n_active * (n_active + 1) / 2.0
    return u_stat / (n_active * n_inactive)
