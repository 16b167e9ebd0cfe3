"""Impartial trimmed mean estimation of the covariance operator.

Each curve ``X_i`` defines the rank-one operator ``W_i f = <X_i, f> X_i``.
Distances between these operators in Hilbert-Schmidt norm only need the
Gram matrix of the curves::

    ||W_i - W_j||^2 = ||X_i||^4 + ||X_j||^4 - 2 <X_i, X_j>^2

The estimator picks the operator whose ``r``-th nearest neighbour is
closest, and averages that operator's ``r`` nearest neighbours
(itself included).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .norms import CovKernel, GridMismatchError, check_grid, trapezoid_weights

# rows per block when distance rows are not materialized all at once
_BLOCK = 1024


@dataclass(frozen=True, eq=False)
class FunctionalData:
    """``n`` curves sampled on a common, strictly increasing grid."""

    values: np.ndarray
    grid: np.ndarray

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.shape[1] != grid.size:
            raise GridMismatchError(
                f"curves have {values.shape[1]} samples but the grid has {grid.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid", grid)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, idx):
        return FunctionalData(self.values[idx], self.grid)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.grid)


@dataclass(frozen=True, eq=False)
class RankOneDistances:
    """Fourth powers of the curve norms and the curves' Gram matrix."""

    norms4: np.ndarray
    gram: np.ndarray

    def squared(self) -> np.ndarray:
        d2 = self.norms4[:, None] + self.norms4[None, :] - 2.0 * self.gram ** 2
        np.maximum(d2, 0.0, out=d2)  # cancellation can go slightly negative
        np.fill_diagonal(d2, 0.0)
        return d2

    def distances(self) -> np.ndarray:
        return np.sqrt(self.squared())


@dataclass(frozen=True, eq=False)
class TrimmedCovEstimate:
    kernel: CovKernel
    retained: np.ndarray
    pivot: int


def _as_functional(X, grid=None) -> FunctionalData:
    if isinstance(X, FunctionalData):
        if grid is not None and not np.array_equal(check_grid(grid), X.grid):
            raise GridMismatchError("data grid differs from the requested grid")
        return X
    if grid is None:
        raise ValueError("a grid is required for raw curve arrays")
    return FunctionalData(X, grid)


def pairwise_hs_distance(X, grid=None) -> RankOneDistances:
    fd = _as_functional(X, grid)
    V = fd.values
    gram = (V * fd.weights) @ V.T
    gram = (gram + gram.T) / 2
    return RankOneDistances(np.diag(gram) ** 2, gram)


def trim_count(n: int, alpha: float) -> int:
    """``r = floor((1 - alpha) n) + 1`` curves are retained."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return int(np.floor(round((1 - alpha) * n, 9))) + 1


def impartial_trimmed_cov(X, alpha: float, grid=None) -> TrimmedCovEstimate:
    """Impartial trimmed mean of the rank-one operators of the curves.

    Distances are computed in row blocks so memory stays O(n * block).
    Neighbour ties are broken by the smaller index, as is the choice of
    the pivot.
    """
    fd = _as_functional(X, grid)
    V = fd.values
    n = V.shape[0]
    r = min(trim_count(n, alpha), n)

    VW = V * fd.weights
    sq = np.einsum("ij,ij->i", VW, V)
    norms4 = sq ** 2

    def rows(start, stop):
        G = VW[start:stop] @ V.T
        d2 = norms4[start:stop, None] + norms4[None, :] - 2.0 * G ** 2
        np.maximum(d2, 0.0, out=d2)
        d2[np.arange(stop - start), np.arange(start, stop)] = 0.0
        return d2

    kth = np.empty(n)
    for start in range(0, n, _BLOCK):
        stop = min(n, start + _BLOCK)
        kth[start:stop] = np.partition(rows(start, stop), r - 1, axis=1)[:, r - 1]
    pivot = int(np.argmin(kth))
    retained = np.sort(np.argsort(rows(pivot, pivot + 1)[0], kind="stable")[:r])
    Vr = V[retained]
    kernel = CovKernel(Vr.T @ Vr / r, fd.grid)
    return TrimmedCovEstimate(kernel, retained, pivot)


def empirical_cov_kernel(X, grid=None) -> CovKernel:
    """``(1/n) sum_i X_i(s) X_i(t)``; center the curves beforehand if needed."""
    fd = _as_functional(X, grid)
    V = fd.values
    if V.shape[0] < 1:
        raise ValueError("no curves")
    return CovKernel(V.T @ V / V.shape[0], fd.grid)


def median_center(X, grid=None) -> FunctionalData:
    """Subtract the pointwise median curve."""
    fd = _as_functional(X, grid)
    return FunctionalData(fd.values - np.median(fd.values, axis=0), fd.grid)


def trimmed_cov_estimator(alpha: float, grid, center: bool = True):
    """Subsample estimator returning the trimmed kernel values on ``grid``.

    With ``center`` each subsample is first centered at its pointwise median.
    """
    grid = check_grid(grid)

    def estimate(values):
        fd = FunctionalData(values, grid)
        if center:
            fd = median_center(fd)
        return impartial_trimmed_cov(fd, alpha).kernel.values

    return estimate


def read_functional_csv(path) -> FunctionalData:
    """First row: grid points; each further row: one curve."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need a grid row and at least one curve")
    return FunctionalData(data[1:], data[0])


def write_functional_csv(path, fd: FunctionalData):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([repr(float(t)) for t in fd.grid])
        for row in fd.values:
            w.writerow([repr(float(v)) for v in row])
