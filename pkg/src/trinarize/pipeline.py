"""Segment an image: cluster -> snap to three labels -> disk-closing mask."""

from __future__ import annotations

import numpy as np

from . import baselines
from .grid import L1, as_field, grid_spec
from .postprocess import DegenerateSegmentationError, DiskKernel, apply_mask, build_mask, quantize
from .reaction import ModelParams
from .solver import default_params, solve

METHOD_NAMES = ("pde", "kmeans", "kmedoids", "agglomerative", "mst")


def raw_trimap(image, method: str = "pde", *, params: ModelParams | None = None,
               seed: int = 0) -> np.ndarray:
    """Unmasked trimap from the chosen clustering method."""
    image = as_field(image)
    if method == "pde":
        params = params or default_params(grid_spec(image))
        return quantize(solve(image, params).final)
    try:
        cluster = baselines.METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHOD_NAMES}") from None
    return baselines.assignment_to_trimap(cluster(image, seed=seed))


def segment(image, method: str = "pde", *, params: ModelParams | None = None,
            disk_radius: int = 20, keep_largest: bool = True, seed: int = 0) -> np.ndarray:
    """Full segmentation; raises DegenerateSegmentationError on empty foreground."""
    t = raw_trimap(image, method, params=params, seed=seed)
    mask = build_mask(t, DiskKernel(disk_radius), keep_largest=keep_largest)
    return apply_mask(t, mask)


def segment_lenient(image, method: str = "pde", **kwargs) -> tuple[np.ndarray, bool]:
    """Like :func:`segment` but maps a degenerate result to all background.

    Returns ``(trimap, degenerate)``; used when scoring, where an empty
    segmentation is a legitimate (bad) prediction rather than an error.
    """
    try:
        return segment(image, method, **kwargs), False
    except DegenerateSegmentationError:
        return np.full(np.shape(image), L1), True
