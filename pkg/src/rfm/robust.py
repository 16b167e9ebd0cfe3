"""Robust estimators applied to each subsample.

Univariate: the sample median, the MAD and the shorth.  Multivariate: a
location/scatter M-estimator with Tukey biweight weights on Mahalanobis
distances, computed by iterative reweighting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

MAD_NORMAL = 1.482602218505602  # 1 / Phi^{-1}(3/4)
MAX_CONDITION = 1e12


class SingularScatterError(ValueError):
    """The weighted scatter matrix is (numerically) singular."""


def median1d(xs) -> float:
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise ValueError("median of an empty sample")
    return float(np.median(xs))


def mad(xs, normalize: bool = True) -> float:
    """Median absolute deviation from the median.

    With ``normalize`` the MAD is scaled to estimate the standard deviation
    at the normal model.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    out = median1d(np.abs(xs - median1d(xs)))
    return out * MAD_NORMAL if normalize else out


def shorth(xs) -> float:
    """Mean of the observations in the shortest half of the sample.

    Windows contain ``h = ceil(n / 2)`` consecutive order statistics; among
    windows of equal minimal width the leftmost is used.
    """
    xs = np.sort(np.asarray(xs, dtype=float).ravel())
    n = xs.size
    if n < 2:
        raise ValueError("shorth needs at least 2 observations")
    h = math.ceil(n / 2)
    widths = xs[h - 1:] - xs[:n - h + 1]
    i = int(np.argmin(widths))
    return float(xs[i:i + h].mean())


@lru_cache(maxsize=None)
def chi2_median(df: int) -> float:
    """Median of the chi-square distribution with ``df`` degrees of freedom.

    Root of the regularized lower incomplete gamma function
    ``P(df/2, x/2) = 1/2``, bracketed and bisected.
    """
    if df < 1:
        raise ValueError("df must be positive")
    f = lambda x: special.gammainc(df / 2.0, x / 2.0) - 0.5  # noqa: E731
    hi = float(df)
    while f(hi) < 0:
        hi *= 2
    return float(optimize.bisect(f, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                                 maxiter=500))


@dataclass(frozen=True)
class MEstimatorConfig:
    """Settings of the biweight location/scatter M-estimator.

    ``tuning_c`` is the univariate biweight cutoff in standard deviation
    units.  On Mahalanobis distances in dimension d it is rescaled by
    ``sqrt(chi2_median(d) / chi2_median(1))`` so that the cutoff sits at the
    same relative position of the distance distribution in every dimension.
    """

    tuning_c: float = 4.685
    max_iter: int = 200
    tol: float = 1e-7

    def __post_init__(self):
        if not self.tuning_c > 0:
            raise ValueError("tuning_c must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def cutoff(self, d: int) -> float:
        return self.tuning_c * math.sqrt(chi2_median(d) / chi2_median(1))


@dataclass(frozen=True, eq=False)
class LocScatterEstimate:
    location: np.ndarray
    scatter: np.ndarray
    iterations: int
    converged: bool


def biweight_weights(dist, c: float) -> np.ndarray:
    u = np.asarray(dist, dtype=float) / c
    return np.where(u < 1.0, (1.0 - u * u) ** 2, 0.0)


def _mahalanobis_sq(R, scatter) -> np.ndarray:
    cond = np.linalg.cond(scatter)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularScatterError(f"scatter matrix is singular (condition number {cond:.3g})")
    L = np.linalg.cholesky(scatter)
    Z = np.linalg.solve(L, R.T)
    return np.sum(Z * Z, axis=0)


def m_estimate_loc_scatter(X, config: MEstimatorConfig | None = None) -> LocScatterEstimate:
    """Biweight M-estimate of multivariate location and scatter.

    Starts from the coordinatewise median and the diagonal of squared
    normalized MADs, then alternates

    1. weights ``w_i = W(d_i)`` from the biweight on Mahalanobis distances,
    2. weighted mean and weighted scatter,
    3. rescaling of the scatter so that the median squared distance equals
       the median of chi-square with d degrees of freedom,

    until the largest standardized parameter change drops below ``tol``.

    Raises
    ------
    SingularScatterError
        If the scatter has condition number above 1e12 at any step, or all
        weights vanish.
    """
    cfg = config or MEstimatorConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be an (n, d) array")
    n, d = X.shape
    if n <= d:
        raise ValueError(f"need more observations than dimensions (n={n}, d={d})")
    c = cfg.cutoff(d)
    target = chi2_median(d)

    mu = np.median(X, axis=0)
    s = np.median(np.abs(X - mu), axis=0) * MAD_NORMAL
    sigma = np.diag(s * s)
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        d2 = _mahalanobis_sq(X - mu, sigma)
        w = biweight_weights(np.sqrt(d2), c)
        wsum = w.sum()
        if wsum <= 0:
            raise SingularScatterError("all biweight weights are zero")
        mu_new = w @ X / wsum
        R = X - mu_new
        sigma_new = (R * w[:, None]).T @ R / wsum
        sigma_new = (sigma_new + sigma_new.T) / 2
        sigma_new *= np.median(_mahalanobis_sq(R, sigma_new)) / target

        sd = np.sqrt(np.diag(sigma_new))
        change = max(np.max(np.abs(mu_new - mu) / sd),
                     np.max(np.abs(sigma_new - sigma) / np.outer(sd, sd)))
        mu, sigma = mu_new, sigma_new
        if change < cfg.tol:
            converged = True
            break
    return LocScatterEstimate(mu, sigma, it, converged)


def m_location(X, config: MEstimatorConfig | None = None) -> np.ndarray:
    return m_estimate_loc_scatter(X, config).location


def m_scatter(X, config: MEstimatorConfig | None = None) -> np.ndarray:
    return m_estimate_loc_scatter(X, config).scatter
