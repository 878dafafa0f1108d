"""Three-cluster intensity baselines: k-means, k-medoids, single linkage, MST.

All four cluster grayscale intensities only.  K-medoids, agglomerative and
MST clustering work on the 256-bin intensity histogram, treating each
occupied bin as a point weighted by its pixel count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import L0, L1, LMID, as_field

MAX_ITER = 300


class ClusteringError(ValueError):
    pass


@dataclass
class ClusterAssignment:
    centers: np.ndarray  # (3,)
    labels: np.ndarray  # H x W ints in {0, 1, 2}
    history: list[float] = field(default_factory=list)  # per-iteration cost


def _distinct_values(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    values, inverse, counts = np.unique(u.ravel(), return_inverse=True, return_counts=True)
    if len(values) < 3:
        raise ClusteringError(f"need at least 3 distinct intensities, found {len(values)}")
    return values, inverse, counts


def _sorted(centers: np.ndarray, labels: np.ndarray, history=None) -> ClusterAssignment:
    order = np.argsort(centers, kind="stable")
    remap = np.empty(3, dtype=np.int64)
    remap[order] = np.arange(3)
    return ClusterAssignment(centers=centers[order], labels=remap[labels],
                             history=list(history or []))


def _nearest(values: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ties resolve to the lower center index
    return np.argmin(np.abs(values[:, None] - centers[None, :]), axis=1)


def _quantile_init(values, counts, rng) -> np.ndarray:
    cum = np.cumsum(counts)
    total = cum[-1]
    picks = [int(np.searchsorted(cum, q * total, side="left")) for q in (1 / 6, 3 / 6, 5 / 6)]
    centers = values[picks].astype(np.float64)
    # heavily skewed histograms can put two quantiles in one value
    while len(np.unique(centers)) < 3:
        for k in (1, 2):
            if centers[k] in centers[:k]:
                centers[k] = values[rng.integers(len(values))]
    return centers


def kmeans3(u, seed: int = 0) -> ClusterAssignment:
    """Lloyd's algorithm on intensities, k=3, quantile initialization.

    Iterates on the distinct intensity values weighted by pixel count, which
    is exactly equivalent to iterating on pixels.  Stops when assignments no
    longer change or after 300 iterations.  ``seed`` only matters when the
    initial quantiles collide or a cluster empties out.
    """
    u = as_field(u)
    values, inverse, counts = _distinct_values(u)
    rng = np.random.default_rng(seed)
    centers = _quantile_init(values, counts, rng)

    assign = _nearest(values, centers)
    history = []
    for _ in range(MAX_ITER):
        for k in range(3):
            members = assign == k
            if counts[members].sum() == 0:
                centers[k] = values[rng.integers(len(values))]
            else:
                centers[k] = np.average(values[members], weights=counts[members])
        history.append(float(np.sum(counts * (values - centers[assign]) ** 2)))
        new = _nearest(values, centers)
        if np.array_equal(new, assign):
            break
        assign = new
    labels = assign[inverse].reshape(u.shape)
    return _sorted(centers, labels, history)


@dataclass
class _Histogram:
    bins: np.ndarray  # occupied bin indices 0..255, ascending
    values: np.ndarray  # observed intensity representing each bin
    weights: np.ndarray  # pixel count per bin
    pixel_bin: np.ndarray  # position in ``bins`` for every pixel


def _histogram(u: np.ndarray) -> _Histogram:
    _distinct_values(u)
    idx = np.clip(np.floor(u.ravel() * 255.0 + 0.5), 0, 255).astype(np.int64)
    bins, pixel_bin, weights = np.unique(idx, return_inverse=True, return_counts=True)
    if len(bins) < 3:
        raise ClusteringError(f"need at least 3 occupied intensity bins, found {len(bins)}")
    # representative: the observed value closest to the bin centre
    flat = u.ravel()
    dist = np.abs(flat - idx / 255.0)
    order = np.lexsort((flat, dist, pixel_bin))
    first = order[np.searchsorted(pixel_bin[order], np.arange(len(bins)))]
    return _Histogram(bins=bins, values=flat[first], weights=weights, pixel_bin=pixel_bin)


def _medoid_cost(values, weights, medoids) -> float:
    return float(np.sum(weights * np.min(np.abs(values[:, None] - medoids[None, :]), axis=1)))


def kmedoids3(u, seed: int = 0) -> ClusterAssignment:
    """PAM (greedy swap) k-medoids on the intensity histogram, k=3.

    Cost is the total absolute deviation of each pixel from its nearest
    medoid.  Starts from the count-weighted 1/6, 1/2, 5/6 quantile bins and
    applies the best improving medoid/non-medoid swap until none improves.
    """
    u = as_field(u)
    h = _histogram(u)
    rng = np.random.default_rng(seed)
    start = _quantile_init(h.values, h.weights, rng)
    medoid_idx = [int(np.flatnonzero(h.values == c)[0]) for c in start]

    values, weights = h.values, h.weights
    dist = np.abs(values[:, None] - values[None, :])
    cost = float(np.sum(weights * dist[:, medoid_idx].min(axis=1)))
    history = [cost]
    for _ in range(MAX_ITER):
        best = (cost, None, None)
        for slot in range(3):
            keep = [m for k, m in enumerate(medoid_idx) if k != slot]
            kept_min = dist[:, keep].min(axis=1)
            # cost for each candidate replacing this slot
            trial = (weights[:, None] * np.minimum(kept_min[:, None], dist)).sum(axis=0)
            trial[medoid_idx] = np.inf
            cand = int(np.argmin(trial))
            if trial[cand] < best[0] - 1e-12:
                best = (float(trial[cand]), slot, cand)
        if best[1] is None:
            break
        cost, slot, cand = best
        medoid_idx[slot] = cand
        history.append(cost)

    centers = values[medoid_idx].astype(np.float64)
    labels = _nearest(u.ravel(), centers).reshape(u.shape)
    return _sorted(centers, labels, history)


def _centers_from_groups(h: _Histogram, group: np.ndarray) -> np.ndarray:
    return np.array([np.average(h.values[group == k], weights=h.weights[group == k])
                     for k in range(3)])


def agglomerative3(u) -> ClusterAssignment:
    """Single-linkage agglomeration of histogram bins down to 3 clusters.

    Clusters are runs of adjacent occupied bins; the linkage distance between
    neighbouring runs is the bin-index gap between them.  The closest pair is
    merged repeatedly; on equal distances the rightmost pair merges first,
    which leaves the leftmost of equally wide gaps as cluster boundaries.
    """
    u = as_field(u)
    h = _histogram(u)
    # clusters as [start, stop) slices over h.bins
    bounds = list(range(len(h.bins) + 1))
    while len(bounds) - 1 > 3:
        gaps = [h.bins[bounds[k]] - h.bins[bounds[k] - 1] for k in range(1, len(bounds) - 1)]
        smallest = min(gaps)
        k = max(i for i, g in enumerate(gaps) if g == smallest)
        del bounds[k + 1]
    group = np.zeros(len(h.bins), dtype=np.int64)
    for k in range(3):
        group[bounds[k]:bounds[k + 1]] = k
    centers = _centers_from_groups(h, group)
    return _sorted(centers, group[h.pixel_bin].reshape(u.shape))


def mst3(u) -> ClusterAssignment:
    """Minimum-spanning-tree clustering: cut the two heaviest MST edges.

    Occupied bins are points on a line, so the MST is the path joining
    consecutive bins with weights equal to the bin-index gaps.  Among equally
    heavy edges the leftmost is cut first.
    """
    u = as_field(u)
    h = _histogram(u)
    weights = np.diff(h.bins)
    order = sorted(range(len(weights)), key=lambda e: (-weights[e], e))
    cut = sorted(order[:2])
    group = np.zeros(len(h.bins), dtype=np.int64)
    group[cut[0] + 1:] += 1
    group[cut[1] + 1:] += 1
    centers = _centers_from_groups(h, group)
    return _sorted(centers, group[h.pixel_bin].reshape(u.shape))


def assignment_to_trimap(ca: ClusterAssignment) -> np.ndarray:
    """Darkest cluster -> L0, middle -> LMID, brightest -> L1."""
    rank = np.empty(3, dtype=np.int64)
    rank[np.argsort(np.asarray(ca.centers), kind="stable")] = np.arange(3)
    encoding = np.array([L0, LMID, L1])
    return encoding[rank[np.asarray(ca.labels)]]


METHODS = {
    "kmeans": kmeans3,
    "kmedoids": kmedoids3,
    "agglomerative": lambda u, seed=0: agglomerative3(u),
    "mst": lambda u, seed=0: mst3(u),
}
