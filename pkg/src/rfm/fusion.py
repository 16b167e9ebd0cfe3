"""Robust fusion: split the sample, estimate on every piece, fuse the pieces.

Parameter fusion keeps the deepest subsample estimate (or the average of
the 40% deepest ones).  Cluster fusion runs trimmed k-means on every
subsample and then once more on the pooled centers.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import covop, robust
from .depth import CandidateSet, deepest_order, depths, top_count
from .rng import derive_rng, derive_seed
from .tkmeans import ITkMConfig, TrimmedKMeansResult, itkm, n_trimmed, trim_assign

log = logging.getLogger(__name__)

FUSE_RULES = ("deepest", "deepest40")


class SubsampleError(RuntimeError):
    """A subsample estimator failed; ``index`` says which subsample."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"estimator failed on subsample {index}: {cause}")
        self.index = index


@dataclass(frozen=True)
class SplitPlan:
    m: int
    l: int  # noqa: E741
    assignment: str = "contiguous"
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.l < 1:
            raise ValueError("m and l must be positive")
        if self.assignment not in ("contiguous", "shuffled"):
            raise ValueError("assignment must be 'contiguous' or 'shuffled'")

    @classmethod
    def for_size(cls, n: int, m: int, **kw) -> "SplitPlan":
        """``m`` subsamples of size ``n // m``."""
        if not 1 <= m <= n:
            raise ValueError(f"need 1 <= m <= n (m={m}, n={n})")
        return cls(m, n // m, **kw)


def split(X, plan: SplitPlan):
    """Cut ``X`` into ``plan.m`` disjoint blocks of ``plan.l`` rows.

    Returns ``(subsamples, discarded)`` where ``discarded = n - m l`` rows
    at the end (after shuffling, if requested) are left out.
    """
    X = np.asarray(X)
    n = len(X)
    used = plan.m * plan.l
    if used > n:
        raise ValueError(f"plan needs {used} observations, only {n} available")
    idx = np.arange(n)
    if plan.assignment == "shuffled":
        idx = derive_rng(plan.seed, 0).permutation(n)
    blocks = [X[idx[j * plan.l:(j + 1) * plan.l]] for j in range(plan.m)]
    if n > used:
        log.info("split discards %d of %d observations", n - used, n)
    return blocks, n - used


def plan_split(n: int, a: float, b: float) -> SplitPlan:
    """Split size balancing ``O(l^a)`` subsample cost and ``O(m^b)`` fusion cost.

    ``l = round(n^((b-1)/(a+b-1)))`` clamped to ``[1, n]``, ``m = n // l``.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if not b > 1:
        raise ValueError("the split-size rule needs b > 1")
    l = int(round(n ** ((b - 1) / (a + b - 1))))  # noqa: E741
    l = min(max(l, 1), n)  # noqa: E741
    return SplitPlan(n // l, l)


@dataclass(eq=False)
class FusionResult:
    estimate: np.ndarray
    depths: np.ndarray
    chosen: int | np.ndarray
    candidates: np.ndarray
    discarded: int = 0
    timing: dict = field(default_factory=dict)


def _map(fn, items, n_jobs):
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def estimate_subsamples(blocks, estimator, n_jobs: int = 1):
    """Apply ``estimator`` to every block; results come back in block order."""

    def run(j):
        t0 = time.perf_counter()
        try:
            out = np.asarray(estimator(blocks[j]), dtype=float)
        except Exception as exc:
            raise SubsampleError(j, exc) from exc
        return out, time.perf_counter() - t0

    res = _map(run, range(len(blocks)), n_jobs)
    return np.stack([r[0] for r in res]), [r[1] for r in res]


def fuse(candidates: CandidateSet, rule: str = "deepest"):
    """Fuse candidates; returns ``(estimate, depths, chosen)``."""
    if rule not in FUSE_RULES:
        raise ValueError(f"unknown fusion rule {rule!r}; expected one of {FUSE_RULES}")
    dep = depths(candidates)
    order = deepest_order(dep)
    if rule == "deepest":
        j = int(order[0])
        return candidates.items[j].copy(), dep, j
    keep = order[:top_count(0.4, len(candidates))]
    return candidates.items[keep].mean(axis=0), dep, np.sort(keep)


def rfm_estimate(X, plan: SplitPlan, estimator, fuse_rule: str = "deepest",
                 norm: str = "euclidean", grid=None, n_jobs: int = 1) -> FusionResult:
    """Split ``X``, estimate on every subsample and fuse by spatial depth.

    ``estimator`` maps a subsample to an array (vector, matrix or kernel
    values); ``norm`` is the depth norm for that kind of estimate, and
    ``grid`` is required for ``"hilbert_schmidt"``.
    """
    blocks, discarded = split(X, plan)
    cands, per_sub = estimate_subsamples(blocks, estimator, n_jobs)
    t0 = time.perf_counter()
    est, dep, chosen = fuse(CandidateSet(cands, norm, grid), fuse_rule)
    timing = {"per_subsample": per_sub, "fuse": time.perf_counter() - t0}
    return FusionResult(est, dep, chosen, cands, discarded, timing)


def rfm_location(X, plan: SplitPlan, fuse_rule="deepest", config=None, n_jobs=1):
    return rfm_estimate(X, plan, lambda S: robust.m_location(S, config), fuse_rule,
                        "euclidean", n_jobs=n_jobs)


def rfm_scatter(X, plan: SplitPlan, fuse_rule="deepest", config=None, n_jobs=1):
    return rfm_estimate(X, plan, lambda S: robust.m_scatter(S, config), fuse_rule,
                        "max_abs_rowsum", n_jobs=n_jobs)


def rfm_covariance(fd: covop.FunctionalData, plan: SplitPlan, alpha: float,
                   fuse_rule="deepest", center=True, n_jobs=1):
    est = covop.trimmed_cov_estimator(alpha, fd.grid, center=center)
    return rfm_estimate(fd.values, plan, est, fuse_rule, "hilbert_schmidt", fd.grid, n_jobs)


@dataclass(eq=False)
class ClusterFusionResult(TrimmedKMeansResult):
    subsample_centers: list = field(default_factory=list)
    pooled: TrimmedKMeansResult | None = None
    discarded: int = 0
    timing: dict = field(default_factory=dict)


def rfm_cluster(X, plan: SplitPlan, k: int, alpha1: float, alpha2: float = 0.1,
                config: ITkMConfig | None = None, n_jobs: int = 1) -> ClusterFusionResult:
    """Two-stage trimmed k-means fusion.

    1. trimmed k-means with level ``alpha1`` on every subsample (subsample
       ``j`` uses a seed derived from ``config.seed`` and ``j``),
    2. trimmed k-means with level ``alpha2`` on the ``k m`` pooled centers,
    3. every observation of ``X`` goes to its nearest fused center and the
       ``floor(n alpha1)`` farthest ones are trimmed (label 0).
    """
    cfg = config or ITkMConfig()
    X = np.asarray(X, dtype=float)
    blocks, discarded = split(X, plan)

    def stage1(j):
        t0 = time.perf_counter()
        try:
            res = itkm(blocks[j], k, alpha1, replace(cfg, seed=derive_seed(cfg.seed, j)))
        except Exception as exc:
            raise SubsampleError(j, exc) from exc
        return res.centers, time.perf_counter() - t0

    res = _map(stage1, range(plan.m), n_jobs)
    sub_centers = [r[0] for r in res]
    t0 = time.perf_counter()
    pooled = np.concatenate(sub_centers)
    pooled_fit = itkm(pooled, k, alpha2, replace(cfg, seed=derive_seed(cfg.seed, plan.m)))
    centers = pooled_fit.centers
    labels, dmin = trim_assign(X, centers, n_trimmed(len(X), alpha1))
    kept = labels > 0
    timing = {"per_subsample": [r[1] for r in res], "fuse": time.perf_counter() - t0}
    return ClusterFusionResult(
        centers=centers,
        radius=float(math.sqrt(dmin[kept].max())),
        labels=labels,
        objective=float(dmin[kept].sum() / kept.sum()),
        subsample_centers=sub_centers,
        pooled=pooled_fit,
        discarded=discarded,
        timing=timing,
    )
