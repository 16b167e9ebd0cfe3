"""Impartial trimmed k-means and the clustering matching error.

The estimator minimizes the mean squared distance to the nearest of ``k``
centers over the best ``n - floor(n alpha)`` observations; the trimmed
observations are chosen by the data.  It is computed by concentration
steps from several random starts.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .rng import derive_rng


@dataclass(frozen=True)
class ITkMConfig:
    n_starts: int = 20
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(eq=False)
class TrimmedKMeansResult:
    """Fitted centers, trimming radius and labels (0 marks a trimmed point)."""

    centers: np.ndarray
    radius: float
    labels: np.ndarray
    objective: float
    n_iter: int = 0
    start: int = 0
    objective_trace: list = field(default_factory=list)


def n_trimmed(n: int, alpha: float) -> int:
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    return int(np.floor(round(n * alpha, 9)))


def sq_distances(X, centers) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if X.shape[-1] != centers.shape[-1]:
        raise ValueError("dimension mismatch between points and centers")
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


def dist_to_centerset(x, centers) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(sq_distances(x[None, :], centers)[0].min()))


def assign_labels(X, centers, radius: float) -> np.ndarray:
    """Closed-ball assignment: 0 outside ``B(centers, radius)``, else 1 + nearest center."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    D2 = sq_distances(X, centers)
    nearest = np.argmin(D2, axis=1)
    dist = np.sqrt(D2[np.arange(len(X)), nearest])
    return np.where(dist <= radius, nearest + 1, 0)


def trim_assign(X, centers, n_trim: int):
    """Nearest-center labels with the ``n_trim`` farthest points set to 0.

    Distance ties at the cut are resolved by trimming the larger index.
    Returns ``(labels, squared distance to the nearest center)``.
    """
    D2 = sq_distances(X, centers)
    nearest = np.argmin(D2, axis=1)
    dmin = D2[np.arange(len(D2)), nearest]
    order = np.argsort(dmin, kind="stable")
    labels = nearest + 1
    if n_trim:
        labels[order[len(order) - n_trim:]] = 0
    return labels, dmin


def _initial_centers(X, k, rng):
    """``k`` distinct data points, taken in a random order of the indices."""
    chosen = []
    for i in rng.permutation(len(X)):
        if not any(np.array_equal(X[i], X[j]) for j in chosen):
            chosen.append(i)
            if len(chosen) == k:
                break
    return X[chosen].copy()


def _concentrate(X, k, n_trim, rng, max_iter):
    n = len(X)
    centers = _initial_centers(X, k, rng)
    n_keep = n - n_trim
    labels, dmin = trim_assign(X, centers, n_trim)
    trace = [dmin[labels > 0].sum() / n_keep]
    it = 0
    for it in range(1, max_iter + 1):
        new_centers = centers.copy()
        kept = labels > 0
        for j in range(k):
            members = labels == j + 1
            if members.any():
                new_centers[j] = X[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the worst retained point
                far = np.flatnonzero(kept)[np.argmax(dmin[kept])]
                new_centers[j] = X[far]
                dmin[far] = 0.0
        new_labels, new_dmin = trim_assign(X, new_centers, n_trim)
        trace.append(new_dmin[new_labels > 0].sum() / n_keep)
        centers, dmin = new_centers, new_dmin
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return centers, labels, dmin, trace, it


def itkm(X, k: int, alpha: float, config: ITkMConfig | None = None,
         n_jobs: int = 1) -> TrimmedKMeansResult:
    """Impartial trimmed k-means by multi-start concentration steps.

    Each start draws ``k`` distinct data points as initial centers, then
    alternates trimming/assignment and center updates until the labels stop
    changing.  The start with the smallest trimmed loss wins (ties go to the
    earlier start); results do not depend on ``n_jobs``.
    """
    cfg = config or ITkMConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if k < 1:
        raise ValueError("k must be at least 1")
    n_trim = n_trimmed(n, alpha)
    if n - n_trim < k:
        raise ValueError(f"cannot fit {k} clusters to {n - n_trim} retained points")
    if len(np.unique(X, axis=0)) < k:
        raise ValueError(f"fewer than {k} distinct points")

    def run(s):
        return _concentrate(X, k, n_trim, derive_rng(cfg.seed, s), cfg.max_iter)

    if n_jobs > 1 and cfg.n_starts > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            runs = list(pool.map(run, range(cfg.n_starts)))
    else:
        runs = [run(s) for s in range(cfg.n_starts)]

    best = min(range(cfg.n_starts), key=lambda s: (runs[s][3][-1], s))
    centers, labels, dmin, trace, it = runs[best]
    kept = labels > 0
    radius = float(np.sqrt(dmin[kept].max()))
    return TrimmedKMeansResult(centers, radius, labels, float(trace[-1]), it, best, trace)


def trimmed_loss(X, centers, labels) -> float:
    """Mean squared distance of each retained point to its assigned center."""
    X = np.asarray(X, dtype=float)
    kept = labels > 0
    diff = X[kept] - np.asarray(centers)[labels[kept] - 1]
    return float(np.sum(diff * diff) / kept.sum())


def matching_error(true_labels, pred_labels, k: int) -> float:
    """Smallest mismatch rate over relabelings of ``{0, ..., k}``.

    The optimal relabeling is an assignment problem on the confusion matrix.
    """
    y = np.asarray(true_labels)
    yhat = np.asarray(pred_labels)
    if y.shape != yhat.shape:
        raise ValueError("label vectors differ in length")
    for lab in (y, yhat):
        if lab.size and (lab.min() < 0 or lab.max() > k):
            raise ValueError(f"labels must lie in 0..{k}")
    conf = np.zeros((k + 1, k + 1), dtype=np.int64)
    np.add.at(conf, (y, yhat), 1)
    rows, cols = linear_sum_assignment(conf, maximize=True)
    return 1.0 - conf[rows, cols].sum() / y.size
