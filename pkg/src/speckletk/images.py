"""Plain image codecs: binary PGM (P5), 8-bit PNG, and the F32M float-map container.

Everything here is byte-deterministic: identical arrays produce identical files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import CorruptStackError, InvalidHeaderError, StackFormatError

F32M_MAGIC = b"F32M"


def write_pgm(image: np.ndarray, path: str | Path) -> None:
    """Write a 2-D uint8 array as binary PGM (P5, maxval 255)."""
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError(f"PGM output requires a 2-D grayscale array, got shape {img.shape}")
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def _pgm_tokens(f) -> list[bytes]:
    """Read the three P5 header tokens (width, height, maxval), skipping comments."""
    tokens: list[bytes] = []
    while len(tokens) < 3:
        tok = b""
        c = f.read(1)
        while c.isspace():
            c = f.read(1)
        if c == b"#":
            while c not in (b"\n", b""):
                c = f.read(1)
            continue
        while c and not c.isspace():
            tok += c
            c = f.read(1)
        if not tok:
            raise CorruptStackError("unexpected end of PGM header")
        tokens.append(tok)
    return tokens


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM (P5) file into a 2-D uint8 array."""
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic != b"P5":
            raise StackFormatError(f"{path}: not a binary PGM (magic {magic!r})")
        try:
            w, h, maxval = (int(t) for t in _pgm_tokens(f))
        except ValueError as e:
            raise StackFormatError(f"{path}: malformed PGM header") from e
        if w <= 0 or h <= 0:
            raise InvalidHeaderError(f"{path}: PGM declares {w}x{h}")
        if maxval != 255:
            raise StackFormatError(f"{path}: only 8-bit PGM supported (maxval={maxval})")
        payload = f.read(w * h)
    if len(payload) != w * h:
        raise CorruptStackError(f"{path}: expected {w * h} pixel bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)


def read_gray_image(path: str | Path) -> np.ndarray:
    """Read an 8-bit grayscale image (PGM or PNG) as a 2-D uint8 array.

    Non-grayscale inputs are rejected rather than converted so frame imports
    never silently change pixel values.
    """
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        return read_pgm(p)
    with Image.open(p) as im:
        if im.mode != "L":
            raise StackFormatError(f"{p}: expected 8-bit grayscale, got mode {im.mode}")
        return np.asarray(im, dtype=np.uint8)


def write_png_gray(image: np.ndarray, path: str | Path) -> None:
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError(f"grayscale PNG requires a 2-D array, got shape {img.shape}")
    Image.fromarray(img, mode="L").save(path, format="PNG")


def write_png_rgb(image: np.ndarray, path: str | Path) -> None:
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"RGB PNG requires an (H, W, 3) array, got shape {img.shape}")
    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def encode_png(image: np.ndarray) -> bytes:
    """Encode a uint8 grayscale (H, W) or RGB (H, W, 3) array as PNG bytes."""
    import io

    img = np.ascontiguousarray(image, dtype=np.uint8)
    mode = "L" if img.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(img, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def read_rgb_or_gray(path: str | Path) -> np.ndarray:
    """Read PNG/PGM as uint8; returns (H, W) for grayscale or (H, W, 3) for color."""
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        return read_pgm(p)
    with Image.open(p) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def write_f32m(values: np.ndarray, path: str | Path) -> None:
    """Write a 2-D float array as F32M: magic, u32 LE width/height, row-major f32 LE."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError(f"F32M requires a 2-D array, got shape {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(F32M_MAGIC)
        f.write(struct.pack("<II", w, h))
        f.write(arr.tobytes())


def read_f32m(path: str | Path) -> np.ndarray:
    """Read an F32M file into a float32 (H, W) array."""
    with open(path, "rb") as f:
        header = f.read(12)
        if len(header) < 12 or header[:4] != F32M_MAGIC:
            raise StackFormatError(f"{path}: not an F32M file")
        w, h = struct.unpack("<II", header[4:12])
        if w == 0 or h == 0:
            raise InvalidHeaderError(f"{path}: F32M declares {w}x{h}")
        payload = f.read(4 * w * h)
    if len(payload) != 4 * w * h:
        raise CorruptStackError(f"{path}: F32M payload truncated")
    return np.frombuffer(payload, dtype="<f4").reshape(h, w).copy()
