"""Quantization to three labels and the disk-closing mask that cleans it up.

Morphology conventions: pixels outside the image count as background during
dilation and as foreground during erosion, so closing never eats into the
image border and is always extensive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage

from .grid import L1, as_trimap


class DegenerateSegmentationError(RuntimeError):
    """The trimap has no foreground to build a mask from."""


@dataclass(frozen=True)
class DiskKernel:
    radius: int = 20

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")

    @cached_property
    def footprint(self) -> np.ndarray:
        r = self.radius
        di, dj = np.mgrid[-r:r + 1, -r:r + 1]
        return di * di + dj * dj <= r * r

    @property
    def offsets(self) -> frozenset[tuple[int, int]]:
        r = self.radius
        return frozenset((int(i) - r, int(j) - r) for i, j in zip(*np.nonzero(self.footprint)))


def quantize(u) -> np.ndarray:
    """Snap each value to the nearest of 0, 0.5, 1.

    ``round(2u)/2`` with halves rounded away from zero, so 0.25 -> 0.5 and
    0.75 -> 1.
    """
    x = 2.0 * np.asarray(u, dtype=np.float64)
    return np.clip(np.sign(x) * np.floor(np.abs(x) + 0.5) / 2.0, 0.0, 1.0)


def dilate(mask, k: DiskKernel) -> np.ndarray:
    return ndimage.binary_dilation(np.asarray(mask, dtype=bool), structure=k.footprint,
                                   border_value=0)


def erode(mask, k: DiskKernel) -> np.ndarray:
    return ndimage.binary_erosion(np.asarray(mask, dtype=bool), structure=k.footprint,
                                  border_value=1)


def closing(mask, k: DiskKernel) -> np.ndarray:
    """Dilation followed by erosion with the same disk."""
    mask = np.asarray(mask, dtype=bool)
    if k.radius == 0:
        return mask.copy()
    return erode(dilate(mask, k), k)


def largest_component(mask) -> np.ndarray:
    """Keep only the largest 4-connected foreground component.

    Ties go to the component whose first pixel comes first in row-major order.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask)
    if count <= 1:
        return mask.copy()
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return labels == int(np.argmax(sizes))


def build_mask(t, k: DiskKernel = DiskKernel(), *, keep_largest: bool = True) -> np.ndarray:
    """Region of interest: closed non-background pixels.

    Raises :class:`DegenerateSegmentationError` if the trimap is all background.
    """
    t = as_trimap(t)
    foreground = t != L1
    if not foreground.any():
        raise DegenerateSegmentationError("trimap has no non-background pixels")
    mask = closing(foreground, k)
    if keep_largest:
        mask = largest_component(mask)
    return mask


def apply_mask(t, mask) -> np.ndarray:
    """Set everything outside ``mask`` to background."""
    t = as_trimap(t)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != t.shape:
        raise ValueError(f"mask shape {mask.shape} does not match trimap {t.shape}")
    return np.where(mask, t, L1)
