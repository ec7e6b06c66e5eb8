"""k-median (medoid) clustering of queries by n-gram set overlap."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

__all__ = ["query_distance", "distance_matrix", "k_median"]


def query_distance(a: set, b: set) -> float:
    """|symmetric difference| / |intersection|; inf when nothing is shared.

    Identical sets are at distance 0, including two empty sets.
    """
    if a == b:
        return 0.0
    inter = len(a & b)
    if inter == 0:
        return math.inf
    return len(a ^ b) / inter


def distance_matrix(sets: Sequence[set]) -> np.ndarray:
    n = len(sets)
    dist = np.zeros((n, n))
    for i in range(n):
        a = sets[i]
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = query_distance(a, sets[j])
    return dist


def _finite(dist: np.ndarray) -> np.ndarray:
    """Replace inf by a penalty larger than any sum of finite distances."""
    finite = dist[np.isfinite(dist)]
    top = finite.max() if finite.size else 0.0
    penalty = (top + 1.0) * (len(dist) + 1)
    return np.where(np.isfinite(dist), dist, penalty)


def _farthest_first(dist: np.ndarray, k: int, rng: np.random.Generator) -> list:
    n = len(dist)
    medoids = [int(rng.integers(n))]
    nearest = dist[medoids[0]].copy()
    while len(medoids) < k:
        score = nearest.copy()
        score[medoids] = -1.0
        pick = int(np.argmax(score))
        medoids.append(pick)
        nearest = np.minimum(nearest, dist[pick])
    return medoids


def k_median(dist: np.ndarray, k: int, max_iter: int = 10, seed: int = 0) -> tuple:
    """Cluster points given a distance matrix.

    Farthest-point seeding from a random start, then best-improvement swaps
    between a medoid and a non-medoid until no swap lowers the total
    distance or ``max_iter`` rounds have run.

    Returns ``(medoids, labels)`` where ``labels[i]`` indexes ``medoids``.
    """
    n = len(dist)
    if n == 0:
        return [], np.zeros(0, dtype=int)
    k = max(1, min(k, n))
    d = _finite(np.asarray(dist, dtype=float))
    rng = np.random.default_rng(seed)
    medoids = _farthest_first(d, k, rng)
    for _ in range(max_iter):
        rows = d[medoids]
        cost = rows.min(axis=0).sum()
        best = (cost, None, None)
        for j in range(k):
            if k > 1:
                excl = np.delete(rows, j, axis=0).min(axis=0)
                cand = np.minimum(excl[None, :], d).sum(axis=1)
            else:
                cand = d.sum(axis=1)
            cand[medoids] = np.inf
            o = int(np.argmin(cand))
            if cand[o] < best[0] - 1e-9:
                best = (cand[o], j, o)
        if best[1] is None:
            break
        medoids[best[1]] = best[2]
    labels = np.argmin(d[medoids], axis=0)
    return medoids, labels
