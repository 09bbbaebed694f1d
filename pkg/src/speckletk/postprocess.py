"""Turn real-valued activity maps into displayable images.

Display chain: normalize to [0, 1], apply the power-law exponent, quantize to
8 bits (round half-up), then optionally pack three channels into RGB or map
through a pseudocolor LUT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptors import ActivityMap
from .errors import CompositionError


@dataclass(frozen=True)
class MinMax:
    """Affine rescale of [min, max] onto [0, 1]; constant maps become all zeros."""


@dataclass(frozen=True)
class FixedRange:
    """Affine rescale of [lo, hi] onto [0, 1] with clamping; comparable across maps."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"fixed range needs lo < hi, got [{self.lo}, {self.hi}]")


Normalization = MinMax | FixedRange


@dataclass(frozen=True)
class DisplayParams:
    """Per-channel display transform: exponent alpha after normalization."""

    alpha: float = 1.0
    normalization: Normalization = MinMax()

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class CompositeSpec:
    """Binding of one (map, display params) pair per RGB channel."""

    red: tuple[ActivityMap, DisplayParams]
    green: tuple[ActivityMap, DisplayParams]
    blue: tuple[ActivityMap, DisplayParams]

    def channels(self) -> tuple[tuple[ActivityMap, DisplayParams], ...]:
        return (self.red, self.green, self.blue)


def normalize_map(values: np.ndarray, normalization: Normalization = MinMax()) -> np.ndarray:
    """Map finite real values into [0, 1] per the chosen mode."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("map contains non-finite values")
    if isinstance(normalization, FixedRange):
        lo, hi = normalization.lo, normalization.hi
        return np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    vmin = values.min()
    vmax = values.max()
    if vmax == vmin:
        return np.zeros_like(values)
    return (values - vmin) / (vmax - vmin)


def apply_exponent(unit_values: np.ndarray, alpha: float) -> np.ndarray:
    """Per-pixel power law v**alpha on unit-interval values."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    unit_values = np.asarray(unit_values, dtype=np.float64)
    if unit_values.size and (unit_values.min() < 0.0 or unit_values.max() > 1.0):
        raise ValueError("apply_exponent expects values in [0, 1]")
    if alpha == 1.0:
        return unit_values.copy()
    return np.power(unit_values, alpha)


def quantize_u8(unit_values: np.ndarray) -> np.ndarray:
    """Quantize unit-interval values to uint8 with round-half-up."""
    unit_values = np.asarray(unit_values, dtype=np.float64)
    if unit_values.size and (unit_values.min() < 0.0 or unit_values.max() > 1.0):
        raise ValueError("quantize_u8 expects values in [0, 1]")
    return np.floor(unit_values * 255.0 + 0.5).astype(np.uint8)


def render_u8(values: np.ndarray, display: DisplayParams) -> np.ndarray:
    """Full display chain for one map: normalize, exponentiate, quantize."""
    return quantize_u8(apply_exponent(normalize_map(values, display.normalization), display.alpha))


def compose_rgb(spec: CompositeSpec) -> np.ndarray:
    """Render each channel independently and pack as (H, W, 3) uint8."""
    shapes = {ch[0].values.shape for ch in spec.channels()}
    if len(shapes) != 1:
        dims = [f"{m.width}x{m.height}" for m, _ in spec.channels()]
        raise CompositionError(f"channel dimensions differ: {', '.join(dims)}")
    rendered = [render_u8(m.values, d) for m, d in spec.channels()]
    return np.stack(rendered, axis=-1)


class PseudocolorLut:
    """256-entry (r, g, b) lookup table applied after quantization."""

    def __init__(self, entries: np.ndarray):
        entries = np.asarray(entries, dtype=np.uint8)
        if entries.shape != (256, 3):
            raise ValueError(f"LUT must have exactly 256 rgb entries, got shape {entries.shape}")
        self.entries = entries

    @classmethod
    def identity_gray(cls) -> "PseudocolorLut":
        ramp = np.arange(256, dtype=np.uint8)
        return cls(np.stack([ramp, ramp, ramp], axis=1))

    @classmethod
    def from_csv(cls, path: str | Path) -> "PseudocolorLut":
        """Load a LUT from CSV lines "index,r,g,b" with all values in 0..255."""
        entries = np.zeros((256, 3), dtype=np.uint8)
        seen = np.zeros(256, dtype=bool)
        rows = 0
        with open(path, "r", encoding="ascii") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                if len(parts) != 4:
                    raise ValueError(f"{path}: expected 'index,r,g,b', got {line!r}")
                idx, r, g, b = (int(p) for p in parts)
                if not 0 <= idx <= 255 or any(not 0 <= v <= 255 for v in (r, g, b)):
                    raise ValueError(f"{path}: values out of range in {line!r}")
                entries[idx] = (r, g, b)
                seen[idx] = True
                rows += 1
        if rows != 256 or not seen.all():
            raise ValueError(f"{path}: LUT must define all 256 indices exactly once, got {rows} rows")
        return cls(entries)


def apply_pseudocolor(unit_values: np.ndarray, lut: PseudocolorLut) -> np.ndarray:
    """Quantize unit-interval values and replace each level by its LUT color."""
    return lut.entries[quantize_u8(unit_values)]


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio between two 8-bit images, in dB.

    Identical images return float('inf').
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)
