"""Exact k-th nearest-neighbour Euclidean distances.

The query point is always excluded from its own neighbour list, while other
points at distance zero (duplicates) count as ordinary neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError

# below this many points a dense distance matrix beats building a tree
BRUTE_FORCE_MAX = 64


@dataclass(frozen=True)
class KnnResult:
    k: int
    distances: np.ndarray
    zero_count: int


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ParameterError(f"points must be an m x d array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ParameterError("points contain non-finite coordinates")
    return pts


def _check_k(k: int, m: int) -> int:
    if m < 2:
        raise ParameterError(f"need at least 2 points for a neighbour query, got {m}")
    if int(k) != k or not 1 <= k <= m - 1:
        raise ParameterError(f"k must be an integer in [1, {m - 1}], got {k}")
    return int(k)


def _result(k: int, dist: np.ndarray) -> KnnResult:
    return KnnResult(k=k, distances=dist, zero_count=int(np.count_nonzero(dist == 0.0)))


def brute_force_knn(points, k: int) -> np.ndarray:
    """O(m^2) reference: sort every row of the full distance matrix."""
    pts = _as_points(points)
    k = _check_k(k, pts.shape[0])
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    # self sits at column 0 after sorting only when it is unique; drop it by index instead
    np.fill_diagonal(dist, np.inf)
    return np.sort(dist, axis=1)[:, k - 1]


def knn_distances(points, k: int) -> KnnResult:
    """Distance from every point to its k-th nearest other point."""
    pts = _as_points(points)
    m, d = pts.shape
    k = _check_k(k, m)
    if d == 1:
        return knn_distances_1d(pts[:, 0], k)
    if m <= BRUTE_FORCE_MAX:
        return _result(k, brute_force_knn(pts, k))
    # the point itself is returned at distance 0, so ask for one extra neighbour
    dist, _ = cKDTree(pts).query(pts, k=k + 1)
    return _result(k, np.ascontiguousarray(dist[:, k]))


def knn_distances_1d(values, k: int) -> KnnResult:
    """One-dimensional specialisation of knn_distances via sorting.

    The k nearest neighbours of a sorted value lie among the k values on
    either side of it, so only a 2k-wide window is examined per point.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 2 and v.shape[1] == 1:
        v = v[:, 0]
    if v.ndim != 1:
        raise ParameterError(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ParameterError("values contain non-finite entries")
    m = v.shape[0]
    k = _check_k(k, m)
    order = np.argsort(v, kind="stable")
    s = v[order]
    padded = np.concatenate([np.full(k, np.nan), s, np.full(k, np.nan)])
    window = np.empty((m, 2 * k))
    for j in range(1, k + 1):
        window[:, j - 1] = s - padded[k - j : k - j + m]
        window[:, k + j - 1] = padded[k + j : k + j + m] - s
    window[np.isnan(window)] = np.inf
    kth = np.partition(window, k - 1, axis=1)[:, k - 1]
    out = np.empty(m)
    out[order] = kth
    return _result(k, out)


def knn_neighbors(points, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Distances (ascending) and indices of the k nearest other points, each m x k."""
    pts = _as_points(points)
    m = pts.shape[0]
    k = _check_k(k, m)
    if m <= BRUTE_FORCE_MAX:
        diff = pts[:, None, :] - pts[None, :, :]
        full = np.sqrt(np.sum(diff * diff, axis=-1))
        np.fill_diagonal(full, np.inf)
        idx = np.argsort(full, axis=1, kind="stable")[:, :k]
        return np.take_along_axis(full, idx, axis=1), idx
    dist, idx = cKDTree(pts).query(pts, k=k + 1)
    # drop the query point itself; with duplicates it may not come first,
    # and if it was crowded out entirely the extra column goes instead
    own = idx == np.arange(m)[:, None]
    own[~own.any(axis=1), k] = True
    keep = ~own
    return dist[keep].reshape(m, k), idx[keep].reshape(m, k)
