"""Spatial depth of candidate estimates and depth-based fusion rules."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norms import CovKernel, batch_norm, check_grid, trapezoid_weights

_ITEM_NDIM = {"euclidean": 1, "max_abs_rowsum": 2, "hilbert_schmidt": 2}


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """A stack of ``m`` candidate estimates of one kind and the norm to use.

    Parameters
    ----------
    items : array_like, shape (m, d) or (m, d, d) or (m, T, T)
        Location vectors, scatter matrices or covariance kernels.
    norm : {"euclidean", "max_abs_rowsum", "hilbert_schmidt"}
    grid : array_like, optional
        Kernel grid, required for ``"hilbert_schmidt"``.
    """

    items: np.ndarray
    norm: str = "euclidean"
    grid: np.ndarray | None = None

    def __post_init__(self):
        if self.norm not in _ITEM_NDIM:
            raise ValueError(f"unsupported norm {self.norm!r}")
        items = np.asarray(self.items, dtype=float)
        want = _ITEM_NDIM[self.norm] + 1
        if items.ndim != want:
            raise ValueError(
                f"{self.norm} candidates must be {want - 1}-dimensional, "
                f"got items of shape {items.shape}")
        if items.shape[0] < 1:
            raise ValueError("candidate set is empty")
        if not np.all(np.isfinite(items)):
            raise ValueError("candidates contain non-finite values")
        if items.ndim == 3 and items.shape[1] != items.shape[2]:
            raise ValueError("matrix candidates must be square")
        grid = None
        if self.norm == "hilbert_schmidt":
            if self.grid is None:
                raise ValueError("hilbert_schmidt candidates need a grid")
            grid = check_grid(self.grid)
            if items.shape[1] != grid.size:
                raise ValueError("kernel size does not match the grid")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_kernels(cls, kernels) -> "CandidateSet":
        kernels = list(kernels)
        grid = kernels[0].grid
        for K in kernels[1:]:
            if not np.array_equal(K.grid, grid):
                raise ValueError("kernels are defined on different grids")
        return cls(np.stack([K.values for K in kernels]), "hilbert_schmidt", grid)

    def __len__(self):
        return self.items.shape[0]

    @property
    def weights(self):
        return None if self.grid is None else trapezoid_weights(self.grid)

    def norms(self, arr) -> np.ndarray:
        return batch_norm(arr, self.norm, self.weights)

    def _coerce(self, x) -> np.ndarray:
        if isinstance(x, CovKernel):
            if self.grid is None or not np.array_equal(x.grid, self.grid):
                raise ValueError("kernel is not compatible with the candidate set")
            x = x.values
        x = np.asarray(x, dtype=float)
        if x.shape != self.items.shape[1:]:
            raise ValueError(
                f"candidate of shape {x.shape} is incompatible with items of "
                f"shape {self.items.shape[1:]}")
        return x


def _depth_with_weights(x, S: CandidateSet, weights) -> float:
    diff = S.items - x
    dist = batch_norm(diff, S.norm, weights)
    nz = dist > 0
    units = np.zeros_like(diff)
    # zero-distance terms contribute the zero vector
    units[nz] = diff[nz] / dist[nz].reshape((-1,) + (1,) * (diff.ndim - 1))
    mean_unit = units.mean(axis=0)
    val = 1.0 - float(batch_norm(mean_unit[None], S.norm, weights)[0])
    return min(max(val, 0.0), 1.0)


def spatial_depth(x, S: CandidateSet) -> float:
    """Empirical spatial depth of ``x`` with respect to the candidates.

    ``1 - || mean_i (X_i - x) / ||X_i - x|| ||``, where candidates equal to
    ``x`` contribute zero. The result lies in ``[0, 1]``.
    """
    return _depth_with_weights(S._coerce(x), S, S.weights)


def depths(S: CandidateSet) -> np.ndarray:
    """Depth of every candidate with respect to the whole set."""
    w = S.weights
    return np.array([_depth_with_weights(S.items[j], S, w) for j in range(len(S))])


def deepest(S: CandidateSet, depth_values=None):
    """Index and value of the deepest candidate; ties go to the smallest index."""
    if depth_values is None:
        depth_values = depths(S)
    j = int(np.argmax(depth_values))
    return j, S.items[j].copy()


def top_count(fraction: float, m: int) -> int:
    """``ceil(fraction * m)``, robust to representation error in ``fraction``."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    return max(1, min(m, math.ceil(round(fraction * m, 9))))


def deepest_order(depth_values) -> np.ndarray:
    """Candidate indices by decreasing depth, ties by increasing index."""
    return np.argsort(-np.asarray(depth_values), kind="stable")


def deepest_trimmed_mean(S: CandidateSet, fraction: float = 0.4, depth_values=None):
    """Entrywise average of the ``ceil(fraction * m)`` deepest candidates."""
    if depth_values is None:
        depth_values = depths(S)
    keep = deepest_order(depth_values)[:top_count(fraction, len(S))]
    return S.items[keep].mean(axis=0)
