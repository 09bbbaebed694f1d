"""Speckle frame-stack container: SPK1 file I/O, directory import, downsampling.

SPK1 layout (little-endian): magic "SPK1", u32 version=1, u32 width, u32 height,
u32 frames, u32 bit_depth=8, 8 reserved zero bytes (header = 32 bytes), then the
frames consecutively, each row-major uint8.

Descriptors consume frames through the small FrameSource interface so huge
stacks can be streamed from disk one frame at a time instead of living in RAM.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import images
from .errors import (
    CorruptStackError,
    DimensionMismatchError,
    InvalidHeaderError,
    StackFormatError,
)

SPK_MAGIC = b"SPK1"
SPK_VERSION = 1
SPK_HEADER_SIZE = 32
FRAME_EXTENSIONS = (".pgm", ".png")


@dataclass
class StackMetadata:
    """Informational tags; never consulted by any computation."""

    wavelength_nm: float | None = None
    label: str = ""
    frame_interval: float | None = None

    def __post_init__(self) -> None:
        if self.wavelength_nm is not None and not self.wavelength_nm > 0:
            raise ValueError(f"wavelength_nm must be > 0, got {self.wavelength_nm}")


class FrameSource:
    """Anything that can hand out a stack's frames in order, one uint8 (H, W) at a time."""

    width: int
    height: int
    n_frames: int
    metadata: StackMetadata

    def frames(self) -> Iterator[np.ndarray]:
        raise NotImplementedError


@dataclass
class FrameStack(FrameSource):
    """In-memory stack of equal-size 8-bit grayscale frames.

    ``data`` has shape (frames, height, width), dtype uint8. Treated as
    immutable after construction; shareable read-only across workers.
    """

    data: np.ndarray
    metadata: StackMetadata = field(default_factory=StackMetadata)

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data)
        if self.data.dtype != np.uint8:
            raise ValueError(f"stack data must be uint8, got {self.data.dtype}")
        if self.data.ndim != 3:
            raise ValueError(f"stack data must be (frames, height, width), got shape {self.data.shape}")
        n, h, w = self.data.shape
        if n < 1 or h < 1 or w < 1:
            raise ValueError(f"stack dimensions must be positive, got {n} frames of {w}x{h}")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def frames(self) -> Iterator[np.ndarray]:
        for k in range(self.n_frames):
            yield self.data[k]

    def pixel_series(self, row: int, col: int) -> np.ndarray:
        """Intensity of one pixel across all frames (handy for tests/oracles)."""
        return self.data[:, row, col]


def _read_header(f, path: Path) -> tuple[int, int, int]:
    header = f.read(SPK_HEADER_SIZE)
    if len(header) < SPK_HEADER_SIZE or header[:4] != SPK_MAGIC:
        raise StackFormatError(f"{path}: not an SPK1 stack")
    version, width, height, frames, depth = struct.unpack("<IIIII", header[4:24])
    if version != SPK_VERSION:
        raise StackFormatError(f"{path}: unsupported SPK version {version}")
    if width == 0 or height == 0 or frames == 0:
        raise InvalidHeaderError(f"{path}: header declares {frames} frames of {width}x{height}")
    if depth != 8:
        raise InvalidHeaderError(f"{path}: only bit depth 8 supported, got {depth}")
    return width, height, frames


def read_stack(path: str | Path, metadata: StackMetadata | None = None) -> FrameStack:
    """Load a whole SPK1 file into memory."""
    path = Path(path)
    with open(path, "rb") as f:
        width, height, frames = _read_header(f, path)
        payload = f.read(width * height * frames)
    expected = width * height * frames
    if len(payload) != expected:
        raise CorruptStackError(f"{path}: expected {expected} pixel bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(frames, height, width).copy()
    meta = metadata if metadata is not None else StackMetadata(label=path.stem)
    return FrameStack(data, meta)


def read_stack_bytes(data: bytes, label: str = "") -> FrameStack:
    """Parse SPK1 content already held in memory (e.g. an upload)."""
    import io

    f = io.BytesIO(data)
    width, height, frames = _read_header(f, Path("<memory>"))
    payload = f.read(width * height * frames)
    expected = width * height * frames
    if len(payload) != expected:
        raise CorruptStackError(f"upload: expected {expected} pixel bytes, got {len(payload)}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(frames, height, width).copy()
    return FrameStack(arr, StackMetadata(label=label))


def write_stack(stack: FrameStack, path: str | Path) -> None:
    """Write a FrameStack as SPK1. Bit-exact round-trip with read_stack."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(_header_bytes(stack.width, stack.height, stack.n_frames))
        f.write(np.ascontiguousarray(stack.data).tobytes())


def _header_bytes(width: int, height: int, frames: int) -> bytes:
    return SPK_MAGIC + struct.pack("<IIIII", SPK_VERSION, width, height, frames, 8) + b"\x00" * 8


class SpkFrameReader(FrameSource):
    """Streams frames from an SPK1 file without loading the whole stack.

    Working set is a single frame; suitable for stacks far larger than RAM.
    """

    def __init__(self, path: str | Path, metadata: StackMetadata | None = None):
        self.path = Path(path)
        with open(self.path, "rb") as f:
            self.width, self.height, self.n_frames = _read_header(f, self.path)
            f.seek(0, os.SEEK_END)
            end = f.tell()
        expected = SPK_HEADER_SIZE + self.width * self.height * self.n_frames
        if end < expected:
            raise CorruptStackError(f"{self.path}: expected {expected} bytes, file has {end}")
        self.metadata = metadata if metadata is not None else StackMetadata(label=self.path.stem)

    def frames(self) -> Iterator[np.ndarray]:
        frame_bytes = self.width * self.height
        with open(self.path, "rb") as f:
            f.seek(SPK_HEADER_SIZE)
            for _ in range(self.n_frames):
                buf = f.read(frame_bytes)
                if len(buf) != frame_bytes:
                    raise CorruptStackError(f"{self.path}: truncated mid-frame")
                yield np.frombuffer(buf, dtype=np.uint8).reshape(self.height, self.width)


class SpkFrameWriter:
    """Incrementally writes an SPK1 file frame by frame.

    The frame count is patched into the header on close, so the writer can be
    fed a stream of unknown length. Use as a context manager.
    """

    def __init__(self, path: str | Path, width: int, height: int):
        if width < 1 or height < 1:
            raise ValueError(f"frame dimensions must be positive, got {width}x{height}")
        self.path = Path(path)
        self.width = width
        self.height = height
        self.n_written = 0
        self._f = open(self.path, "wb")
        self._f.write(_header_bytes(width, height, 0))

    def append(self, frame: np.ndarray) -> None:
        frame = np.ascontiguousarray(frame, dtype=np.uint8)
        if frame.shape != (self.height, self.width):
            raise DimensionMismatchError(
                f"frame is {frame.shape[1]}x{frame.shape[0]}, writer expects {self.width}x{self.height}"
            )
        self._f.write(frame.tobytes())
        self.n_written += 1

    def close(self) -> None:
        if self._f.closed:
            return
        if self.n_written == 0:
            self._f.close()
            self.path.unlink(missing_ok=True)
            raise ValueError("refusing to write a zero-frame stack")
        self._f.seek(16)  # frame-count field of the header
        self._f.write(struct.pack("<I", self.n_written))
        self._f.close()

    def __enter__(self) -> "SpkFrameWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            self._f.close()
            self.path.unlink(missing_ok=True)
        else:
            self.close()


def import_frame_dir(directory: str | Path, metadata: StackMetadata | None = None) -> FrameStack:
    """Build a stack from a directory of 8-bit PGM/grayscale-PNG frames.

    Frame order is the lexicographic order of filenames; pixel values are
    preserved exactly.
    """
    directory = Path(directory)
    names = sorted(p.name for p in directory.iterdir() if p.suffix.lower() in FRAME_EXTENSIONS)
    if len(names) < 2:
        raise StackFormatError(f"{directory}: need at least 2 frame files, found {len(names)}")
    frames = []
    for name in names:
        img = images.read_gray_image(directory / name)
        if frames and img.shape != frames[0].shape:
            raise DimensionMismatchError(
                f"{name} is {img.shape[1]}x{img.shape[0]}, "
                f"expected {frames[0].shape[1]}x{frames[0].shape[0]} from {names[0]}"
            )
        frames.append(img)
    meta = metadata if metadata is not None else StackMetadata(label=directory.name)
    return FrameStack(np.stack(frames), meta)


def downsample(stack: FrameStack, spatial_factor: int, temporal_stride: int) -> FrameStack:
    """Shrink a stack for preview: block-mean spatially, subsample temporally.

    Each output pixel is the mean of a spatial_factor x spatial_factor block,
    rounded half-up to 8 bits; trailing rows/cols that don't fill a block are
    dropped. Frames are taken at indices 0, stride, 2*stride, ...
    """
    if spatial_factor < 1:
        raise ValueError(f"spatial_factor must be >= 1, got {spatial_factor}")
    if temporal_stride < 1:
        raise ValueError(f"temporal_stride must be >= 1, got {temporal_stride}")
    data = stack.data[::temporal_stride]
    f = spatial_factor
    if f > 1:
        h = (stack.height // f) * f
        w = (stack.width // f) * f
        if h == 0 or w == 0:
            raise ValueError(f"spatial_factor {f} larger than frame {stack.width}x{stack.height}")
        blocks = data[:, :h, :w].reshape(data.shape[0], h // f, f, w // f, f)
        sums = blocks.sum(axis=(2, 4), dtype=np.int64)
        # round-half-up of sums / f^2 in exact integer arithmetic
        data = ((2 * sums + f * f) // (2 * f * f)).astype(np.uint8)
    else:
        data = data.copy()
    return FrameStack(data, stack.metadata)
