"""Synthetic sperm-like test images with exact three-class ground truth.

A phantom is an elliptical head on a bright background, with the front part
of the head (a half-plane cut perpendicular to the long axis) darkened as the
acrosome and a thin wavy tail attached to the back.  The tail is drawn with
head intensity but belongs to the background class in the truth map, which is
what a segmentation of head/acrosome is expected to produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .grid import L0, L1, LMID


class PhantomError(ValueError):
    pass


@dataclass(frozen=True)
class PhantomSpec:
    height: int = 128
    width: int = 128
    center: tuple[float, float] = (64.0, 56.0)  # (row, col)
    semi_axes: tuple[float, float] = (26.0, 16.0)  # (long, short)
    rotation: float = 0.0  # radians, long axis measured from +x
    acrosome_fraction: float = 0.5
    tail_length: float = 40.0
    tail_width: float = 1.5
    tail_wave: float = 3.0
    intensities: tuple[float, float, float] = (0.95, 0.60, 0.25)  # background, head, acrosome
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.height < 2 or self.width < 2:
            raise PhantomError("phantom must be at least 2x2")
        if not 0.4 <= self.acrosome_fraction <= 0.7:
            raise PhantomError("acrosome_fraction must lie in [0.4, 0.7]")
        if min(self.semi_axes) <= 0:
            raise PhantomError("semi-axes must be positive")
        if self.noise_sigma < 0:
            raise PhantomError("noise_sigma must be >= 0")
        levels = sorted(self.intensities)
        if any(not 0.0 <= v <= 1.0 for v in levels):
            raise PhantomError("intensities must lie in [0, 1]")
        if levels[1] - levels[0] < 0.1 or levels[2] - levels[1] < 0.1:
            raise PhantomError("intensities must be pairwise separated by >= 0.1")

    def replace(self, **changes) -> "PhantomSpec":
        return replace(self, **changes)


def cap_position(fraction: float) -> float:
    """Normalized long-axis coordinate t with ellipse area fraction left of t.

    For the unit disk the area with x <= t is
    ``(t sqrt(1 - t^2) + arcsin t + pi/2) / pi``; the same holds for any
    ellipse after scaling.
    """
    def area(t):
        return (t * math.sqrt(1.0 - t * t) + math.asin(t) + math.pi / 2) / math.pi - fraction
    return brentq(area, -1.0, 1.0, xtol=1e-14)


def _tail_polyline(spec: PhantomSpec) -> np.ndarray:
    """Tail vertices in head-frame coordinates (long axis, short axis)."""
    long_axis = spec.semi_axes[0]
    if spec.tail_length <= 0:
        return np.empty((0, 2))
    s = np.linspace(0.0, spec.tail_length, 9)
    offset = spec.tail_wave * np.sin(2.0 * math.pi * s / spec.tail_length)
    # start slightly inside the head so the tail is attached
    return np.column_stack([long_axis - 1.0 + s, offset])


def _to_image(points: np.ndarray, spec: PhantomSpec) -> np.ndarray:
    ct, st = math.cos(spec.rotation), math.sin(spec.rotation)
    cy, cx = spec.center
    x = cx + points[:, 0] * ct - points[:, 1] * st
    y = cy + points[:, 0] * st + points[:, 1] * ct
    return np.column_stack([y, x])


def _segment_distance(py, px, poly: np.ndarray) -> np.ndarray:
    best = np.full(py.shape, np.inf)
    for (y0, x0), (y1, x1) in zip(poly[:-1], poly[1:]):
        vy, vx = y1 - y0, x1 - x0
        seg2 = vy * vy + vx * vx
        s = np.clip(((py - y0) * vy + (px - x0) * vx) / seg2, 0.0, 1.0)
        d = np.hypot(py - (y0 + s * vy), px - (x0 + s * vx))
        best = np.minimum(best, d)
    return best


def _check_frame(spec: PhantomSpec, tail: np.ndarray) -> None:
    A, B = spec.semi_axes
    ct, st = math.cos(spec.rotation), math.sin(spec.rotation)
    half_w = math.hypot(A * ct, B * st)
    half_h = math.hypot(A * st, B * ct)
    cy, cx = spec.center
    ys = [cy - half_h, cy + half_h]
    xs = [cx - half_w, cx + half_w]
    if len(tail):
        pad = spec.tail_width / 2.0
        ys += [tail[:, 0].min() - pad, tail[:, 0].max() + pad]
        xs += [tail[:, 1].min() - pad, tail[:, 1].max() + pad]
    if min(ys) < 0 or min(xs) < 0 or max(ys) > spec.height - 1 or max(xs) > spec.width - 1:
        raise PhantomError("phantom regions do not fit in the frame")


def regions(spec: PhantomSpec) -> dict[str, np.ndarray]:
    """Boolean maps for ``head`` (including acrosome), ``acrosome`` and ``tail``."""
    tail_poly = _to_image(_tail_polyline(spec), spec)
    _check_frame(spec, tail_poly)

    rows, cols = np.mgrid[0:spec.height, 0:spec.width].astype(np.float64)
    cy, cx = spec.center
    ct, st = math.cos(spec.rotation), math.sin(spec.rotation)
    along = (cols - cx) * ct + (rows - cy) * st
    across = -(cols - cx) * st + (rows - cy) * ct
    A, B = spec.semi_axes
    head = (along / A) ** 2 + (across / B) ** 2 <= 1.0
    acrosome = head & (along <= cap_position(spec.acrosome_fraction) * A)
    if len(tail_poly):
        tail = (_segment_distance(rows, cols, tail_poly) <= spec.tail_width / 2.0) & ~head
    else:
        tail = np.zeros_like(head)
    return {"head": head, "acrosome": acrosome, "tail": tail}


def generate(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(image, truth)`` for ``spec``.

    The image is placed on the 8-bit lattice so it survives a PNG round trip
    unchanged.  The truth labels background/tail as L1, head as LMID and
    acrosome as L0, and does not depend on the noise.
    """
    reg = regions(spec)
    bg, head_i, acro_i = spec.intensities

    clean = np.full((spec.height, spec.width), bg)
    clean[reg["head"] | reg["tail"]] = head_i
    clean[reg["acrosome"]] = acro_i

    rng = np.random.default_rng(spec.seed)
    noisy = clean + rng.normal(0.0, 1.0, clean.shape) * spec.noise_sigma
    image = np.floor(np.clip(noisy, 0.0, 1.0) * 255.0 + 0.5) / 255.0

    truth = np.full(clean.shape, L1)
    truth[reg["head"]] = LMID
    truth[reg["acrosome"]] = L0
    return image, truth


def suite(count: int = 5, seed: int = 0, **overrides) -> list[PhantomSpec]:
    """A reproducible family of phantoms with jittered pose and anatomy."""
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        base = PhantomSpec(**overrides)
        long_axis = base.semi_axes[0] * rng.uniform(0.9, 1.1)
        short_axis = base.semi_axes[1] * rng.uniform(0.9, 1.1)
        specs.append(base.replace(
            semi_axes=(long_axis, short_axis),
            rotation=float(rng.uniform(-0.5, 0.5)),
            acrosome_fraction=float(rng.uniform(0.4, 0.7)),
            tail_wave=float(rng.uniform(1.0, 4.0)),
            center=(base.center[0] + rng.uniform(-4, 4), base.center[1] + rng.uniform(-4, 4)),
            seed=int(rng.integers(0, 2**31 - 1)),
        ))
    return specs
