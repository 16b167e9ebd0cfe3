"""Vector, matrix and kernel norms used by the depth functions.

Three norms are needed:

* the Euclidean norm for location vectors,
* the maximum absolute row sum norm for scatter matrices,
* the Hilbert-Schmidt norm for covariance kernels sampled on a grid.

Kernel inner products are discretized with trapezoid quadrature weights, so
``hs_inner(K1, K2)`` approximates ``int int K1(s, t) K2(s, t) ds dt``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_RTOL = 1e-10

NORM_KINDS = ("euclidean", "max_abs_rowsum", "hilbert_schmidt", "frobenius")


class GridMismatchError(ValueError):
    """Two functional objects live on different grids."""


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be one-dimensional with at least 2 points")
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid contains non-finite values")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def check_symmetric(S, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Return ``S`` as a float array, raising if it is not symmetric.

    Asymmetric input is rejected rather than symmetrized.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix contains non-finite entries")
    scale = np.max(np.abs(S)) if S.size else 0.0
    if np.max(np.abs(S - S.T), initial=0.0) > rtol * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric")
    return S


def trapezoid_weights(grid) -> np.ndarray:
    """Quadrature weights: half the sum of the adjacent spacings."""
    grid = check_grid(grid)
    h = np.diff(grid)
    w = np.empty_like(grid)
    w[0] = h[0] / 2
    w[-1] = h[-1] / 2
    w[1:-1] = (h[:-1] + h[1:]) / 2
    return w


@dataclass(frozen=True, eq=False)
class CovKernel:
    """A covariance kernel ``values[s, t]`` sampled on ``grid``."""

    values: np.ndarray
    grid: np.ndarray

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = check_symmetric(self.values)
        if values.shape != (grid.size, grid.size):
            raise ValueError(
                f"kernel shape {values.shape} does not match grid of size {grid.size}")
        values.setflags(write=False)
        grid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid", grid)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.grid)

    def __add__(self, other):
        _same_grid(self, other)
        return CovKernel(self.values + other.values, self.grid)

    def __sub__(self, other):
        _same_grid(self, other)
        return CovKernel(self.values - other.values, self.grid)

    def __mul__(self, c):
        return CovKernel(float(c) * self.values, self.grid)

    __rmul__ = __mul__

    @classmethod
    def outer(cls, f, grid) -> "CovKernel":
        """Rank-one kernel ``f(s) f(t)``."""
        f = np.asarray(f, dtype=float)
        return cls(np.outer(f, f), grid)


def _same_grid(a: CovKernel, b: CovKernel):
    if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
        raise GridMismatchError("kernels are defined on different grids")


def euclidean_norm(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(np.sum(v * v)))


def max_abs_rowsum_norm(S) -> float:
    """``max_i sum_j |S_ij|`` (the matrix norm induced by the sup norm)."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2:
        raise ValueError("expected a matrix")
    return float(np.max(np.sum(np.abs(S), axis=1)))


def hs_inner(K1: CovKernel, K2: CovKernel) -> float:
    _same_grid(K1, K2)
    w = K1.weights
    return float(np.einsum("st,st,s,t->", K1.values, K2.values, w, w))


def hs_norm(K: CovKernel) -> float:
    return float(np.sqrt(max(hs_inner(K, K), 0.0)))


def batch_norm(arr, kind: str, weights=None) -> np.ndarray:
    """Norm of every element of a stack ``arr[j, ...]``.

    ``kind`` is one of ``NORM_KINDS``. ``"hilbert_schmidt"`` needs the
    quadrature ``weights`` of the kernel grid; ``"frobenius"`` is the plain
    grid (counting measure) version of it.
    """
    arr = np.asarray(arr, dtype=float)
    if kind == "euclidean":
        return np.sqrt(np.sum(arr * arr, axis=-1))
    if kind == "max_abs_rowsum":
        return np.max(np.sum(np.abs(arr), axis=-1), axis=-1)
    if kind == "hilbert_schmidt":
        if weights is None:
            raise ValueError("hilbert_schmidt norm requires quadrature weights")
        ww = np.outer(weights, weights)
        return np.sqrt(np.sum(arr * arr * ww, axis=(-2, -1)))
    if kind == "frobenius":
        return np.sqrt(np.sum(arr * arr, axis=(-2, -1)))
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")
