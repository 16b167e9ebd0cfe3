"""Data generators and Monte Carlo studies.

Generators
    contaminated 5-d Gaussian with Cauchy outliers, a Fourier functional
    model with shifted outlier curves, and a three-cluster planar model with
    diffuse outliers kept out of the clusters' 75% ellipsoids.

Studies
    median-of-medians efficiency, breakdown frequencies of the median of
    subsample medians, and replicate-averaged error tables for location,
    scatter, covariance operator and clustering fusion.

Every study is a pure function of its arguments and a master seed; replicate
``r`` draws its data from ``derive_rng(seed, r)``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special, stats

from . import covop, robust
from .covop import FunctionalData
from .depth import CandidateSet
from .fusion import (SplitPlan, estimate_subsamples, fuse, rfm_cluster, split)
from .norms import CovKernel, batch_norm, trapezoid_weights
from .rng import derive_rng, derive_seed
from .tkmeans import ITkMConfig, itkm, matching_error

# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class ContaminatedGaussianSpec:
    d: int = 5
    off_diag: float = 0.2
    outlier_center: float = 50.0
    p: float = 0.2
    n: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if not abs(self.off_diag) < 1:
            raise ValueError("|off_diag| must be below 1")

    @property
    def cov(self) -> np.ndarray:
        return equicorrelation(self.d, self.off_diag)


def equicorrelation(d: int, off_diag: float) -> np.ndarray:
    return np.full((d, d), float(off_diag)) + (1.0 - off_diag) * np.eye(d)


def gen_contaminated_gaussian(spec: ContaminatedGaussianSpec):
    """Rows from ``N(0, cov)``, each replaced with probability ``p`` by a
    vector of independent standard Cauchy coordinates shifted to
    ``outlier_center``.  Returns ``(X, outlier_flags)``."""
    cov = spec.cov
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError(f"off_diag={spec.off_diag} gives a non-PSD covariance") from None
    rng = derive_rng(spec.seed)
    X = rng.standard_normal((spec.n, spec.d)) @ L.T
    flags = rng.random(spec.n) < spec.p
    u = rng.random((int(flags.sum()), spec.d))
    X[flags] = spec.outlier_center + np.tan(np.pi * (u - 0.5))
    return X, flags


@dataclass(frozen=True)
class KrausModelSpec:
    n_grid: int = 20
    n: int = 50_000
    p: float = 0.2
    outlier_shift: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        if not 0 <= self.p < 1:
            raise ValueError("p must lie in [0, 1)")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_grid)


N_TERMS = 10


def kraus_basis(grid):
    """Scaled sine and cosine components, each of shape ``(10, T)``."""
    k = np.arange(1, N_TERMS + 1)
    lam = k ** -3.0
    nu = (1.0 / 3.0) ** k
    arg = 2 * np.pi * np.outer(k, grid)
    A = np.sqrt(2) * lam[:, None] * np.sin(arg)
    B = np.sqrt(2) * nu[:, None] * np.cos(arg)
    return A, B


def kraus_true_kernel(grid) -> CovKernel:
    A, B = kraus_basis(grid)
    return CovKernel(A.T @ A + B.T @ B, grid)


def kraus_variance(grid) -> np.ndarray:
    A, B = kraus_basis(grid)
    return np.sum(A * A, axis=0) + np.sum(B * B, axis=0)


def kraus_outlier_mean(grid) -> np.ndarray:
    return 2.0 - 8.0 * np.sin(np.pi * np.asarray(grid))


def gen_kraus(spec: KrausModelSpec):
    """Curves with standard normal Fourier coefficients; outliers (probability
    ``p``) get the mean curve ``2 - 8 sin(pi t)``.  Returns ``(data, flags)``."""
    grid = spec.grid
    A, B = kraus_basis(grid)
    rng = derive_rng(spec.seed)
    a = rng.standard_normal((spec.n, N_TERMS))
    b = rng.standard_normal((spec.n, N_TERMS))
    V = a @ A + b @ B
    flags = rng.random(spec.n) < spec.p
    if spec.outlier_shift:
        V[flags] += kraus_outlier_mean(grid)
    return FunctionalData(V, grid), flags


ELLIPSOID_LEVEL = 0.75


def chi2_2_quantile(level: float) -> float:
    """Closed form: the chi-square(2) cdf is ``1 - exp(-q/2)``."""
    return -2.0 * math.log(1.0 - level)


@dataclass(frozen=True)
class ThreeClusterSpec:
    fac: int = 10
    seed: int = 0
    means: tuple = ((0.0, 0.0), (0.0, 10.0), (6.0, 0.0))
    outlier_mean: tuple = (2.0, 10.0 / 3.0)
    cluster_cov_scale: float = 1.5
    outlier_cov_scale: float = 20.0
    base_sizes: tuple = (15, 30, 30, 40)
    ellipsoid_level: float = ELLIPSOID_LEVEL

    def __post_init__(self):
        if self.fac < 1:
            raise ValueError("fac must be at least 1")

    @property
    def sizes(self):
        return tuple(self.fac * s for s in self.base_sizes)


def inside_cluster_ellipsoids(X, spec: ThreeClusterSpec) -> np.ndarray:
    q = chi2_2_quantile(spec.ellipsoid_level)
    X = np.atleast_2d(X)
    inside = np.zeros(len(X), dtype=bool)
    for mu in spec.means:
        diff = X - np.asarray(mu)
        inside |= np.sum(diff * diff, axis=1) / spec.cluster_cov_scale <= q
    return inside


def gen_three_clusters(spec: ThreeClusterSpec):
    """Three Gaussian clusters plus diffuse outliers, in random row order.

    Outliers falling inside any cluster's 75% ellipsoid are redrawn.
    Returns ``(X, labels)`` with labels 1-3 for clusters and 0 for outliers.
    """
    rng = derive_rng(spec.seed)
    sizes = spec.sizes
    parts, labels = [], []
    for j, mu in enumerate(spec.means):
        parts.append(np.asarray(mu) + math.sqrt(spec.cluster_cov_scale)
                     * rng.standard_normal((sizes[j], 2)))
        labels.append(np.full(sizes[j], j + 1))
    n_out = sizes[len(spec.means)]
    out = np.empty((0, 2))
    while len(out) < n_out:
        cand = np.asarray(spec.outlier_mean) + math.sqrt(spec.outlier_cov_scale) \
            * rng.standard_normal((2 * (n_out - len(out)) + 8, 2))
        out = np.concatenate([out, cand[~inside_cluster_ellipsoids(cand, spec)]])
    parts.append(out[:n_out])
    labels.append(np.zeros(n_out, dtype=int))
    X = np.concatenate(parts)
    y = np.concatenate(labels)
    perm = rng.permutation(len(X))
    return X[perm], y[perm]


# ---------------------------------------------------------------------------
# median of medians


@dataclass(frozen=True)
class EfficiencyModel:
    k: int
    pdf: Callable = stats.norm.pdf
    cdf: Callable = stats.norm.cdf

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")


def median_density(y, model: EfficiencyModel):
    """Density of the median of ``2k + 1`` iid draws, via log-factorials."""
    k = model.k
    F = np.asarray(model.cdf(y), dtype=float)
    f = np.asarray(model.pdf(y), dtype=float)
    logc = special.gammaln(2 * k + 2) - 2 * special.gammaln(k + 1)
    with np.errstate(divide="ignore"):
        logg = logc + special.xlogy(k, F) + special.xlogy(k, 1.0 - F) + np.log(f)
    return np.exp(logg)


def median_of_medians_variance(k: int, m: int, center: float = 0.0,
                               model: EfficiencyModel | None = None) -> float:
    """Asymptotic variance ``1 / (4 m g(center)^2)`` of the median of medians."""
    model = model or EfficiencyModel(k)
    g = float(median_density(center, model))
    return 1.0 / (4.0 * m * g * g)


def efficiency_study(k: int, m: int, reps: int, seed: int = 0, chunk: int = 200,
                     return_variances: bool = False):
    """Monte Carlo ratio Var(full-sample median) / Var(median of medians).

    Each replicate draws ``n = m (2k + 1)`` standard normals, cut into ``m``
    contiguous blocks.
    """
    if reps < 100:
        raise ValueError("reps must be at least 100")
    l = 2 * k + 1  # noqa: E741
    full, fused = [], []
    for c, start in enumerate(range(0, reps, chunk)):
        r = min(chunk, reps - start)
        Z = derive_rng(seed, c).standard_normal((r, m, l))
        full.append(np.median(Z.reshape(r, m * l), axis=1))
        fused.append(np.median(np.median(Z, axis=2), axis=1))
    v_full = float(np.var(np.concatenate(full), ddof=1))
    v_fused = float(np.var(np.concatenate(fused), ddof=1))
    if return_variances:
        return v_full / v_fused, v_full, v_fused
    return v_full / v_fused


# ---------------------------------------------------------------------------
# breakdown


def breakdown_mc(n: int, m_values, p_values, reps: int, seed: int = 0):
    """Frequency with which the median of subsample medians breaks down.

    Observation ``i`` is an outlier with probability ``p``.  A subsample of
    size ``l`` is broken when at least half of it is outliers (for
    ``l = 2k + 1`` that is more than ``k``), and the fused median breaks when
    at least half of the ``m`` subsamples are broken.

    Outlier counts per subsample are drawn by inverting the Binomial(l, p)
    cdf at uniforms shared across ``p_values``, so frequencies are
    comparable across ``p`` (common random numbers).

    Returns one dict per ``(m, p)`` with keys ``m, l, p, breakdown,
    discarded``.
    """
    rows = []
    for m in m_values:
        m = int(m)
        l = n // m  # noqa: E741
        U = derive_rng(seed, m).random((reps, m))
        for p in p_values:
            cdf = stats.binom.cdf(np.arange(l + 1), l, p)
            S = np.minimum(np.searchsorted(cdf, U, side="left"), l)
            broken = 2 * S >= l
            fused_broken = 2 * broken.sum(axis=1) >= m
            rows.append({"m": m, "l": l, "p": float(p),
                         "breakdown": float(fused_broken.mean()),
                         "discarded": n - m * l})
    return rows


# ---------------------------------------------------------------------------
# error metrics


def _errors(estimates, truth, norm, grid):
    estimates = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth.values if isinstance(truth, CovKernel) else truth, dtype=float)
    if estimates.shape[1:] != truth.shape:
        if estimates.shape == truth.shape:
            estimates = estimates[None]
        else:
            raise ValueError(f"estimate shape {estimates.shape} does not match truth {truth.shape}")
    w = trapezoid_weights(grid) if norm == "hilbert_schmidt" else None
    return batch_norm(estimates - truth, norm, w)


def mse_report(estimates, truth, norm: str = "euclidean", grid=None) -> float:
    """Average over replicates of the squared ``norm`` of ``estimate - truth``."""
    e = _errors(estimates, truth, norm, grid)
    return float(np.mean(e * e))


def mean_error(estimates, truth, norm: str = "euclidean", grid=None) -> float:
    """Average over replicates of the ``norm`` of ``estimate - truth``."""
    return float(np.mean(_errors(estimates, truth, norm, grid)))


# ---------------------------------------------------------------------------
# replicate studies


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def _packed_loc_scatter(S, config):
    e = robust.m_estimate_loc_scatter(S, config)
    return np.concatenate([e.location, e.scatter.ravel()])


def _loc_scatter_replicates(n, m, d, p, reps, seed, off_diag, outlier_center,
                            config, n_jobs):
    est = {key: [] for key in ("MLE", "ROB", "avROB", "RFM1", "RFM")}
    loc = {key: [] for key in est}
    t0s, t1s = [], []
    plan = SplitPlan.for_size(n, m)
    for r in range(reps):
        spec = ContaminatedGaussianSpec(d, off_diag, outlier_center, p, n, derive_seed(seed, r))
        X, _ = gen_contaminated_gaussian(spec)
        loc["MLE"].append(X.mean(axis=0))
        est["MLE"].append(np.cov(X.T, bias=True))
        whole, t0 = _timed(robust.m_estimate_loc_scatter, X, config)
        loc["ROB"].append(whole.location)
        est["ROB"].append(whole.scatter)
        t1_start = time.perf_counter()
        blocks, _ = split(X, plan)
        fits, _ = estimate_subsamples(blocks, lambda S: _packed_loc_scatter(S, config), n_jobs)
        locs, scats = fits[:, :d], fits[:, d:].reshape(m, d, d)
        lset = CandidateSet(locs, "euclidean")
        sset = CandidateSet(scats, "max_abs_rowsum")
        loc["avROB"].append(locs.mean(axis=0))
        est["avROB"].append(scats.mean(axis=0))
        loc["RFM"].append(fuse(lset, "deepest")[0])
        loc["RFM1"].append(fuse(lset, "deepest40")[0])
        est["RFM"].append(fuse(sset, "deepest")[0])
        est["RFM1"].append(fuse(sset, "deepest40")[0])
        t0s.append(t0)
        t1s.append(time.perf_counter() - t1_start)
    return loc, est, equicorrelation(d, off_diag), t0s, t1s


def simulate_location(n=100_000, m=100, d=5, p=0.2, reps=5, seed=0, off_diag=0.2,
                      outlier_center=50.0, config=None, n_jobs=1, timings=False):
    """Location table row: replicate-averaged squared Euclidean errors."""
    loc, _, _, t0s, t1s = _loc_scatter_replicates(
        n, m, d, p, reps, seed, off_diag, outlier_center, config, n_jobs)
    row = {"n": n, "m": m, "p": p, "reps": reps}
    for key in ("MLE", "ROB", "avROB", "RFM1", "RFM"):
        row[key] = mse_report(np.array(loc[key]), np.zeros(d), "euclidean")
    if timings:
        row["T0"], row["T1"] = float(np.mean(t0s)), float(np.mean(t1s))
    return row


def simulate_scatter(n=100_000, m=100, d=5, p=0.2, reps=5, seed=0, off_diag=0.2,
                     outlier_center=50.0, config=None, n_jobs=1, timings=False):
    """Scatter table row: replicate-averaged max-abs-row-sum errors."""
    _, est, truth, t0s, t1s = _loc_scatter_replicates(
        n, m, d, p, reps, seed, off_diag, outlier_center, config, n_jobs)
    row = {"n": n, "m": m, "p": p, "reps": reps}
    if timings:
        row["T0"], row["T1"] = float(np.mean(t0s)), float(np.mean(t1s))
    for key in ("MLE", "ROB", "avROB", "RFM1", "RFM"):
        row[key] = mean_error(np.array(est[key]), truth, "max_abs_rowsum")
    return row


def simulate_covop(n=50_000, m=20, p=0.2, alpha=0.25, n_grid=20, reps=1, seed=0,
                   center=True, global_robust=False, error_norm="frobenius",
                   n_jobs=1, timings=False):
    """Covariance operator table row.

    Errors are distances to the true kernel, by default in the grid
    Hilbert-Schmidt (Frobenius) norm of the ``T x T`` kernel matrix.  ``ROB``
    (the trimmed estimator on the whole sample, O(n^2) time) is only
    computed when ``global_robust`` is set.
    """
    spec0 = KrausModelSpec(n_grid, n, p)
    grid = spec0.grid
    truth = kraus_true_kernel(grid)
    plan = SplitPlan.for_size(n, m)
    keys = ["MLE"] + (["ROB"] if global_robust else []) + ["avROB", "RFM1", "RFM"]
    est = {key: [] for key in keys}
    t0s, t1s = [], []
    estimator = covop.trimmed_cov_estimator(alpha, grid, center=center)
    for r in range(reps):
        fd, _ = gen_kraus(KrausModelSpec(n_grid, n, p, True, derive_seed(seed, r)))
        V = fd.values
        est["MLE"].append(covop.empirical_cov_kernel(V - V.mean(axis=0), grid).values)
        if global_robust:
            K, t0 = _timed(estimator, V)
            est["ROB"].append(K)
            t0s.append(t0)
        t1_start = time.perf_counter()
        blocks, _ = split(V, plan)
        cands, _ = estimate_subsamples(blocks, estimator, n_jobs)
        cset = CandidateSet(cands, "hilbert_schmidt", grid)
        est["avROB"].append(cands.mean(axis=0))
        est["RFM"].append(fuse(cset, "deepest")[0])
        est["RFM1"].append(fuse(cset, "deepest40")[0])
        t1s.append(time.perf_counter() - t1_start)
    row = {"n": n, "m": m, "p": p, "alpha": alpha, "T": n_grid, "reps": reps}
    if timings:
        if t0s:
            row["T0"] = float(np.mean(t0s))
        row["T1"] = float(np.mean(t1s))
    for key in keys:
        row[key] = mean_error(np.array(est[key]), truth, error_norm, grid)
    return row


def simulate_cluster(fac=10, m=10, alpha1=0.35, alpha2=0.1, reps=5, seed=0,
                     config: ITkMConfig | None = None, n_jobs=1, timings=False):
    """Clustering table row: matching errors of whole-sample trimmed k-means
    (ME1) and of cluster fusion (ME2), averaged over replicates."""
    cfg = config or ITkMConfig()
    me1, me2, t0s, t1s = [], [], [], []
    for r in range(reps):
        X, y = gen_three_clusters(ThreeClusterSpec(fac, derive_seed(seed, r)))
        rcfg = ITkMConfig(cfg.n_starts, cfg.max_iter, derive_seed(cfg.seed, r))
        whole, t0 = _timed(itkm, X, 3, alpha1, rcfg, n_jobs=n_jobs)
        plan = SplitPlan.for_size(len(X), m)
        fused, t1 = _timed(rfm_cluster, X, plan, 3, alpha1, alpha2, rcfg, n_jobs=n_jobs)
        me1.append(matching_error(y, whole.labels, 3))
        me2.append(matching_error(y, fused.labels, 3))
        t0s.append(t0)
        t1s.append(t1)
    n = sum(ThreeClusterSpec(fac).sizes)
    row = {"n": n, "m": m, "alpha1": alpha1, "alpha2": alpha2, "reps": reps}
    if timings:
        row["T0"], row["T1"] = float(np.mean(t0s)), float(np.mean(t1s))
    row["ME1"] = float(np.mean(me1))
    row["ME2"] = float(np.mean(me2))
    return row
