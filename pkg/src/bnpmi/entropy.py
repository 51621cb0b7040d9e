"""k-nearest-neighbour entropy estimators (nats).

``knn_entropy`` is the classic Kozachenko-Leonenko estimator in its k-NN
form.  ``weighted_posterior_entropy`` is its weighted analogue evaluated on a
finite random measure ``sum_i w_i delta(y_i)``; with equal weights on
distinct atoms the two agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .knn import knn_distances, knn_neighbors
from .special import knn_entropy_offset, unit_ball_log_volume

EPSILON_FLOOR = 1e-10
WEIGHT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    k: int
    m: int
    zero_distance_count: int


def _log_distances(dist: np.ndarray, epsilon_floor: float) -> tuple[np.ndarray, int]:
    zeros = int(np.count_nonzero(dist <= 0.0))
    return np.log(np.maximum(dist, epsilon_floor)), zeros


def knn_entropy(data, k: int = 3, *, epsilon_floor: float = EPSILON_FLOOR) -> EntropyEstimate:
    """k-NN Kozachenko-Leonenko entropy estimate of an n x d sample.

    H = (d/n) sum_i log R_i + log V_d - L_{k-1} + gamma + log(n - 1)

    where R_i is the distance from point i to its k-th nearest neighbour
    and V_d the volume of the unit ball.  Zero distances from duplicated
    points are floored at ``epsilon_floor`` and counted.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    if n < k + 1:
        raise ParameterError(f"need n >= k + 1 points, got n={n}, k={k}")
    if np.all(x == x[0]):
        raise DegenerateInputError("all points are identical; entropy is undefined")
    res = knn_distances(x, k)
    logr, zeros = _log_distances(res.distances, epsilon_floor)
    value = (
        d * float(np.mean(logr))
        + unit_ball_log_volume(d)
        + knn_entropy_offset(k)
        + math.log(n - 1)
    )
    return EntropyEstimate(value=value, k=k, m=n, zero_distance_count=zeros)


def merge_coincident(atoms, weights) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapse identical atoms into one support point carrying their total weight.

    Returns the distinct points (in lexicographic order), their summed
    weights and their multiplicities.  ``sum_i w_i delta(y_i)`` is the same
    measure before and after.
    """
    y = np.asarray(atoms, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[1] == 1:
        order = np.argsort(y[:, 0], kind="stable")
    else:
        order = np.lexsort(y.T[::-1])
    ys = y[order]
    starts = np.ones(ys.shape[0], dtype=bool)
    starts[1:] = np.any(ys[1:] != ys[:-1], axis=1)
    group = np.cumsum(starts) - 1
    return ys[starts], np.bincount(group, weights=w[order]), np.bincount(group)


def _check_measure(dp) -> tuple[np.ndarray, np.ndarray]:
    atoms = np.asarray(dp.atoms, dtype=float)
    weights = np.asarray(dp.weights, dtype=float)
    if atoms.ndim == 1:
        atoms = atoms[:, None]
    if weights.shape != (atoms.shape[0],):
        raise ParameterError(
            f"{weights.shape[0] if weights.ndim else 0} weights for {atoms.shape[0]} atoms"
        )
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
        raise ParameterError(f"weights must be non-negative and sum to 1, sum={weights.sum()!r}")
    return atoms, weights


def weighted_posterior_entropy(
    dp,
    k: int = 3,
    *,
    epsilon_floor: float = EPSILON_FLOOR,
    merge: bool = True,
) -> EntropyEstimate:
    """Entropy of a finite random measure from its k-NN distances.

    ``dp`` is anything with ``atoms`` (N x d) and ``weights`` (length N)
    attributes, typically a DPApproximation.  For distinct atoms the estimate is

        sum_i w_i log((N - 1) V_d R_i^d / k) - L_{k-1} + gamma + log k

    with R_i the distance from atom i to its k-th nearest other atom: the
    ball of radius R_i holds k of the N - 1 other atoms.

    With ``merge`` (the default) coincident atoms are first combined into one
    support point j with multiplicity c_j and summed weight, and the same
    atom count is taken over distinct points: R_j is the distance to the
    k-th nearest other support point and the ball holds K_j atoms (the
    multiplicities of those k points) out of N - c_j, so the log term
    becomes log((N - c_j) V_d R_j^d / K_j).  With equal multiplicities this
    is the formula above on the distinct points.  The ``m`` field reports
    the number of distinct points.
    """
    atoms, weights = _check_measure(dp)
    if not merge:
        m, d = atoms.shape
        if m < k + 1:
            raise ParameterError(f"need at least k + 1 = {k + 1} atoms, got {m}")
        res = knn_distances(atoms, k)
        logr, zeros = _log_distances(res.distances, epsilon_floor)
        per_atom = d * logr + (math.log(m - 1) + unit_ball_log_volume(d) - math.log(k))
        value = float(np.dot(weights, per_atom)) + knn_entropy_offset(k) + math.log(k)
        return EntropyEstimate(value=value, k=k, m=m, zero_distance_count=zeros)

    total = atoms.shape[0]
    points, mass, counts = merge_coincident(atoms, weights)
    m, d = points.shape
    if m < k + 1:
        raise DegenerateInputError(
            f"only {m} distinct atoms, need at least k + 1 = {k + 1}"
        )
    dist, idx = knn_neighbors(points, k)
    logr, zeros = _log_distances(dist[:, -1], epsilon_floor)
    inside = counts[idx].sum(axis=1)
    per_point = d * logr + np.log(total - counts) - np.log(inside) + unit_ball_log_volume(d)
    value = float(np.dot(mass, per_point)) + knn_entropy_offset(k) + math.log(k)
    return EntropyEstimate(value=value, k=k, m=m, zero_distance_count=zeros)
