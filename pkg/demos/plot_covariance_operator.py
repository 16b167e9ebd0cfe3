"""
Trimmed covariance operator of curves
=====================================

Curves on a 20-point grid with random Fourier coefficients; a fifth of
them are shifted by a smooth bump.  Each curve defines a rank-one
operator.  The trimmed estimator averages the operators closest to the
most central one.
"""

import numpy as np

from rfm import (SplitPlan, empirical_cov_kernel, impartial_trimmed_cov, median_center,
                 rfm_covariance)
from rfm.simulate import KrausModelSpec, gen_kraus, kraus_true_kernel

fd, flags = gen_kraus(KrausModelSpec(n=20_000, p=0.2, seed=4))
truth = kraus_true_kernel(fd.grid).values


def err(K):
    return np.linalg.norm(K - truth)


# Untrimmed kernel, centered at the pointwise mean.
centered = fd.values - fd.values.mean(axis=0)
print("empirical kernel error:", err(empirical_cov_kernel(centered, fd.grid).values))

# Trimmed estimator on one small block.
block = median_center(fd[:1000])
est = impartial_trimmed_cov(block, alpha=0.25)
kept = flags[:1000][est.retained]
print(f"one block: error {err(est.kernel.values):.3f}, "
      f"{kept.sum()} shifted curves among {est.retained.size} kept")

# Fused over 20 blocks by Hilbert-Schmidt depth.
res = rfm_covariance(fd, SplitPlan.for_size(len(fd), 20), alpha=0.25, n_jobs=4)
print("fused kernel error:", err(res.estimate))
print("average of block kernels:", err(res.candidates.mean(axis=0)))
