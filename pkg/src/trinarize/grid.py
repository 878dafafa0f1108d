"""Field and label containers, 8-bit image I/O, and grid spacing.

Conventions used throughout the package:

* A scalar field is a 2-D ``float64`` array indexed ``u[row, col]``.  Rows run
  along y (``m`` = height), columns along x (``n`` = width).
* A trimap is a scalar field whose values are restricted to the three
  encodings ``L0 = 0.0`` (dark class), ``LMID = 0.5`` and ``L1 = 1.0``
  (bright class / background).
* A binary mask is a 2-D ``bool`` array.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

L0 = 0.0
LMID = 0.5
L1 = 1.0
LABELS = (L0, LMID, L1)

# trimap encoding -> PNG byte
_LABEL_BYTES = {L0: 0, LMID: 128, L1: 255}


class ImageFormatError(ValueError):
    """Raised for images the loader refuses to interpret."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    m: int
    dx: float
    dy: float


def as_field(values, *, check_range: bool = False) -> np.ndarray:
    """Validate and return ``values`` as a float64 H x W array."""
    u = np.asarray(values, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError(f"field must be 2-D, got shape {u.shape}")
    if u.shape[0] < 2 or u.shape[1] < 2:
        raise ValueError(f"field must be at least 2x2, got {u.shape[0]}x{u.shape[1]}")
    if check_range and (np.any(u < 0.0) or np.any(u > 1.0)):
        raise ValueError("field values must lie in [0, 1]")
    return u


def is_trimap(t) -> bool:
    t = np.asarray(t)
    return t.ndim == 2 and bool(np.all((t == L0) | (t == LMID) | (t == L1)))


def as_trimap(values) -> np.ndarray:
    t = np.asarray(values, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError(f"trimap must be 2-D, got shape {t.shape}")
    if not is_trimap(t):
        raise ValueError("trimap values must be one of 0, 0.5, 1")
    return t


def grid_spec(u) -> GridSpec:
    """Spacing of the unit square sampled at the field's pixel centres.

    Uses ``dx = 1/(width-1)`` and ``dy = 1/(height-1)`` so that the first and
    last pixels sit on the domain boundary.
    """
    u = np.asarray(u)
    if u.ndim != 2:
        raise ValueError(f"field must be 2-D, got shape {u.shape}")
    m, n = u.shape
    if n < 2 or m < 2:
        raise ValueError(f"grid needs width and height >= 2, got {n}x{m}")
    return GridSpec(n=n, m=m, dx=1.0 / (n - 1), dy=1.0 / (m - 1))


# ---------------------------------------------------------------------------
# decoding


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PGM header")
    return data[start:pos], pos


def _decode_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    pos = 2
    tokens = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        try:
            tokens.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"bad PGM header field {tok!r}") from None
    width, height, maxval = tokens
    if width <= 0 or height <= 0:
        raise ImageFormatError("zero-sized image")
    if maxval > 255:
        raise ImageFormatError(
            f"16-bit PGM (maxval={maxval}) is not supported; export as 8-bit")
    if maxval <= 0:
        raise ImageFormatError(f"bad PGM maxval {maxval}")

    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header and raster
        raster = data[pos + 1:pos + 1 + count]
        if len(raster) != count:
            raise ImageFormatError("truncated PGM raster")
        raw = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        fields = data[pos:].split()
        if len(fields) < count:
            raise ImageFormatError("truncated PGM raster")
        raw = np.array([int(v) for v in fields[:count]], dtype=np.float64)
    if raw.max(initial=0) > maxval:
        raise ImageFormatError("PGM sample exceeds maxval")
    raw = raw.reshape(height, width)
    if maxval != 255:
        raw *= 255.0 / maxval
    return raw


def _decode_pil(path: Path) -> np.ndarray:
    try:
        img = Image.open(path)
        img.load()
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot read image {path}: {exc}") from exc

    if img.width == 0 or img.height == 0:
        raise ImageFormatError("zero-sized image")
    mode = img.mode
    if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
        raise ImageFormatError(
            f"{path}: {mode} (16-bit or wider) images are not supported; export as 8-bit")
    if mode == "L":
        return np.asarray(img, dtype=np.float64)
    if mode == "LA":
        return np.asarray(img, dtype=np.float64)[..., 0]
    if mode == "1":
        return np.asarray(img.convert("L"), dtype=np.float64)
    # multi-channel: plain average of R, G, B on the 8-bit lattice
    rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    return np.floor(rgb.mean(axis=2) + 0.5)


def load_raw(path) -> np.ndarray:
    """Return the 8-bit samples of a grayscale image as float64 in [0, 255]."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if data[:2] in (b"P2", b"P5"):
        raw = _decode_pgm(data)
    else:
        raw = _decode_pil(path)
    if raw.size == 0:
        raise ImageFormatError("zero-sized image")
    return raw


def load_grayscale(path) -> np.ndarray:
    """Load an 8-bit PNG or PGM (P2/P5) as a field with values ``raw/255``."""
    return load_raw(path) / 255.0


# ---------------------------------------------------------------------------
# encoding


def to_bytes(u) -> np.ndarray:
    """Quantize a unit-interval field onto the 8-bit lattice."""
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    return np.floor(u * 255.0 + 0.5).astype(np.uint8)


def save_field(u, path) -> None:
    """Write a [0, 1] field as an 8-bit grayscale PNG."""
    Image.fromarray(to_bytes(u), mode="L").save(Path(path), format="PNG")


def trimap_bytes(t) -> np.ndarray:
    t = as_trimap(t)
    out = np.empty(t.shape, dtype=np.uint8)
    for label, byte in _LABEL_BYTES.items():
        out[t == label] = byte
    return out


def save_trimap(t, path) -> None:
    """Write a trimap as PNG with pixel bytes 0, 128, 255 for L0, LMID, L1."""
    Image.fromarray(trimap_bytes(t), mode="L").save(Path(path), format="PNG")


def load_trimap(path) -> np.ndarray:
    """Read a trimap PNG back, mapping bytes to the nearest label."""
    raw = load_raw(path)
    t = np.full(raw.shape, LMID)
    t[raw < 64] = L0
    t[raw >= 192] = L1
    return t
