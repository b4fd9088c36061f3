"""Lloyd's k-means with k-means++ seeding and empty-cluster repair."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tweetdemog.errors import DataError, ParameterError

MAX_ITER = 300


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    history: list[float] = field(default_factory=list)


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            i = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            i = min(i, n - 1)
        else:
            i = int(rng.integers(n))
        centers[j] = x[i]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))
    return centers


def _sq_dists(x, centers):
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _repair_empty(x, labels, centers, k):
    """Give every empty cluster the point of the largest cluster farthest from its centre."""
    for j in range(k):
        sizes = np.bincount(labels, minlength=k)
        if sizes[j]:
            continue
        big = int(np.argmax(sizes))
        members = np.flatnonzero(labels == big)
        d = ((x[members] - centers[big]) ** 2).sum(axis=1)
        # ties resolve to the highest index so the donor's lowest member stays
        far = members[len(d) - 1 - int(np.argmax(d[::-1]))]
        labels[far] = j
        centers[j] = x[far]
    return labels


def _inertia(x, labels, centers):
    return float(((x - centers[labels]) ** 2).sum())


def lloyd(x: np.ndarray, k: int, seed, max_iter: int = MAX_ITER) -> KMeansResult:
    """Single k-means run from one k-means++ initialisation."""
    rng = np.random.default_rng(seed)
    centers = kmeans_plusplus(x, k, rng)
    labels = _repair_empty(x, np.argmin(_sq_dists(x, centers), axis=1), centers, k)
    history = [_inertia(x, labels, centers)]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        for j in range(k):
            centers[j] = x[labels == j].mean(axis=0)
        history.append(_inertia(x, labels, centers))
        new = _repair_empty(x, np.argmin(_sq_dists(x, centers), axis=1), centers, k)
        history.append(_inertia(x, new, centers))
        if np.array_equal(new, labels):
            break
        labels = new
    return KMeansResult(labels, centers, history[-1], n_iter, history)


def kmeans(x, k: int, seed: int = 0, n_init: int = 10, max_iter: int = MAX_ITER,
           normalize: bool = True) -> KMeansResult:
    """Best of ``n_init`` seeded runs (lowest inertia); rows are L2-normalised first.

    Restart seeds are spawned from ``seed``, so the result is deterministic.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("k-means input must be a 2-D array")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if x.shape[0] < k:
        raise DataError(f"k-means needs at least k={k} points, got {x.shape[0]}")
    if normalize:
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        x = x / np.where(norms > 0, norms, 1.0)
    best = None
    for child in np.random.SeedSequence(seed).spawn(max(1, n_init)):
        res = lloyd(x, k, child, max_iter)
        if best is None or res.inertia < best.inertia:
            best = res
    return best
