"""Per-pixel activity descriptors over speckle frame stacks.

All four descriptors share the tuneable kernel

    g(a, b, phi) = sqrt(|a^2 + b^2 + 2ab cos(pi - phi)|)

with the angle phi in degrees (0 recovers |a - b|, 180 recovers a + b).
Each map is computed in a single streaming pass over the frames: working
memory is one float64 accumulator per pixel plus a 2- or 3-frame window,
independent of stack length (GD without a lag cap is the one exception and
holds every frame).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InsufficientFramesError
from .stack_io import FrameSource

# All-pairs GD is O(N^2); above this frame count a lag cap must be given.
GD_UNCAPPED_FRAME_LIMIT = 256


class Algorithm(str, Enum):
    AVD = "avd"
    FUJII = "fujii"
    TAU = "tau"
    GD = "gd"


@dataclass(frozen=True)
class DescriptorParams:
    """Algorithm selection plus its tuning angle.

    ``phi_degrees`` is ignored by GD; ``max_lag`` applies only to GD and
    restricts frame pairs to lags <= max_lag.
    """

    algorithm: Algorithm
    phi_degrees: float = 0.0
    max_lag: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.phi_degrees <= 180.0:
            raise ValueError(f"phi_degrees must be in [0, 180], got {self.phi_degrees}")
        if self.max_lag is not None and self.max_lag < 1:
            raise ValueError(f"max_lag must be >= 1, got {self.max_lag}")


@dataclass
class ActivityMap:
    """Non-negative per-pixel descriptor output plus how it was produced.

    ``degenerate_terms`` counts summation terms that were skipped because a
    denominator vanished while the numerator did not (Fujii/tau only).
    """

    values: np.ndarray
    params: DescriptorParams | None = None
    stack_label: str = ""
    degenerate_terms: int = 0

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def provenance(self) -> dict:
        prov = {
            "algorithm": self.params.algorithm.value if self.params else "file",
            "phi_degrees": self.params.phi_degrees if self.params else None,
            "stack_label": self.stack_label,
            "degenerate_terms": self.degenerate_terms,
        }
        if self.params is not None and self.params.max_lag is not None:
            prov["max_lag"] = self.params.max_lag
        return prov


def _check_phi(phi_degrees: float) -> tuple[float, float]:
    """Validate phi and return (cos(pi - phi), cos(phi))."""
    if not 0.0 <= phi_degrees <= 180.0:
        raise ValueError(f"phi_degrees must be in [0, 180], got {phi_degrees}")
    phi = math.radians(phi_degrees)
    return math.cos(math.pi - phi), math.cos(phi)


def generalized_sum(a, b, phi_degrees: float):
    """Tuneable pairwise kernel sqrt(|a^2 + b^2 + 2ab cos(pi - phi)|).

    Symmetric in (a, b) and non-negative. Accepts scalars or arrays.
    """
    cn, _ = _check_phi(phi_degrees)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.sqrt(np.abs(a * a + b * b + 2.0 * cn * (a * b)))
    return out if out.ndim else float(out)


def avd_map(stack: FrameSource, phi_degrees: float) -> ActivityMap:
    """Mean tuneable difference over consecutive frame pairs.

    Per pixel: (1/(N-1)) * sum over k of g(I_k, I_{k+1}, phi).
    """
    cn, _ = _check_phi(phi_degrees)
    n = stack.n_frames
    if n < 2:
        raise InsufficientFramesError(f"AVD needs >= 2 frames, stack has {n}")
    acc = np.zeros((stack.height, stack.width), dtype=np.float64)
    prev = prev_sq = None
    for frame in stack.frames():
        cur = frame.astype(np.float64)
        cur_sq = cur * cur
        if prev is not None:
            acc += np.sqrt(np.abs(prev_sq + cur_sq + (2.0 * cn) * (prev * cur)))
        prev, prev_sq = cur, cur_sq
    acc /= n - 1
    return ActivityMap(acc, DescriptorParams(Algorithm.AVD, phi_degrees), stack.metadata.label)


def fujii_map(stack: FrameSource, phi_degrees: float) -> ActivityMap:
    """Sum of normalized tuneable differences over consecutive frame pairs.

    Per pixel each pair contributes sqrt(|num| / |den|) with
    num = a^2 + b^2 + 2ab cos(pi - phi) and den = a^2 + b^2 + 2ab cos(phi).
    A pair with den = 0 contributes 0; if its num is nonzero the skip is
    recorded in the degenerate-term counter.
    """
    cn, cp = _check_phi(phi_degrees)
    n = stack.n_frames
    if n < 2:
        raise InsufficientFramesError(f"Fujii needs >= 2 frames, stack has {n}")
    acc = np.zeros((stack.height, stack.width), dtype=np.float64)
    degenerate = 0
    prev = prev_sq = None
    for frame in stack.frames():
        cur = frame.astype(np.float64)
        cur_sq = cur * cur
        if prev is not None:
            cross = prev * cur
            num = prev_sq + cur_sq + (2.0 * cn) * cross
            den = prev_sq + cur_sq + (2.0 * cp) * cross
            ok = den != 0.0
            degenerate += int(np.count_nonzero(~ok & (num != 0.0)))
            ratio = np.zeros_like(num)
            np.divide(np.abs(num), np.abs(den), out=ratio, where=ok)
            acc += np.sqrt(ratio)
        prev, prev_sq = cur, cur_sq
    return ActivityMap(
        acc, DescriptorParams(Algorithm.FUJII, phi_degrees), stack.metadata.label, degenerate
    )


def tau_map(stack: FrameSource, phi_degrees: float) -> ActivityMap:
    """Triple-frame tuneable descriptor, summed over the N-2 sliding triples.

    For a triple (a, b, c) with S(x, y) = x^2 + y^2 + 2xy cos(pi - phi) and
    T(x, y) = x^2 + y^2 + 2xy cos(phi), the term is sqrt(|R|) with

        R = [S(a,b) S(a,c) / S(b,c)] / [T(a,b) T(a,c) / T(b,c)]

    evaluated as the single fraction S(a,b) S(a,c) T(b,c) / (T(a,b) T(a,c)
    S(b,c)); zero denominators are handled exactly as in fujii_map.
    """
    cn, cp = _check_phi(phi_degrees)
    n = stack.n_frames
    if n < 3:
        raise InsufficientFramesError(f"tau needs >= 3 frames, stack has {n}")
    acc = np.zeros((stack.height, stack.width), dtype=np.float64)
    degenerate = 0
    window: deque[tuple[np.ndarray, np.ndarray]] = deque(maxlen=3)
    two_cn, two_cp = 2.0 * cn, 2.0 * cp
    for frame in stack.frames():
        cur = frame.astype(np.float64)
        window.append((cur, cur * cur))
        if len(window) == 3:
            (a, a2), (b, b2), (c, c2) = window
            ab, ac, bc = a * b, a * c, b * c
            num = (a2 + b2 + two_cn * ab) * (a2 + c2 + two_cn * ac) * (b2 + c2 + two_cp * bc)
            den = (a2 + b2 + two_cp * ab) * (a2 + c2 + two_cp * ac) * (b2 + c2 + two_cn * bc)
            ok = den != 0.0
            degenerate += int(np.count_nonzero(~ok & (num != 0.0)))
            ratio = np.zeros_like(num)
            np.divide(np.abs(num), np.abs(den), out=ratio, where=ok)
            acc += np.sqrt(ratio)
    return ActivityMap(
        acc, DescriptorParams(Algorithm.TAU, phi_degrees), stack.metadata.label, degenerate
    )


def gd_map(stack: FrameSource, max_lag: int | None = None) -> ActivityMap:
    """Sum of |I_k - I_l| over frame pairs k < l, optionally capped to l - k <= max_lag.

    Without a cap the pass holds every seen frame, so stacks longer than
    GD_UNCAPPED_FRAME_LIMIT frames must supply max_lag.
    """
    n = stack.n_frames
    if n < 2:
        raise InsufficientFramesError(f"GD needs >= 2 frames, stack has {n}")
    if max_lag is not None and max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    if max_lag is None and n > GD_UNCAPPED_FRAME_LIMIT:
        raise ValueError(
            f"uncapped GD over {n} frames is O(N^2); pass max_lag for stacks "
            f"longer than {GD_UNCAPPED_FRAME_LIMIT} frames"
        )
    acc = np.zeros((stack.height, stack.width), dtype=np.float64)
    window: deque[np.ndarray] = deque(maxlen=max_lag)
    for frame in stack.frames():
        cur = frame.astype(np.int16)
        for old in window:
            acc += np.abs(cur - old)
        window.append(cur)
    return ActivityMap(
        acc, DescriptorParams(Algorithm.GD, 0.0, max_lag), stack.metadata.label
    )


def compute_descriptor(stack: FrameSource, params: DescriptorParams) -> ActivityMap:
    """Dispatch to the map operation selected by ``params.algorithm``."""
    if params.algorithm is Algorithm.AVD:
        return avd_map(stack, params.phi_degrees)
    if params.algorithm is Algorithm.FUJII:
        return fujii_map(stack, params.phi_degrees)
    if params.algorithm is Algorithm.TAU:
        return tau_map(stack, params.phi_degrees)
    if params.algorithm is Algorithm.GD:
        return gd_map(stack, params.max_lag)
    raise ValueError(f"unknown algorithm {params.algorithm!r}")
