"""
Fusing robust location and scatter estimates
============================================

A 5-dimensional Gaussian sample where a fifth of the rows are replaced by
Cauchy noise centered far away.  Each block gets a biweight M-estimate;
the blocks are fused by spatial depth.
"""

import numpy as np

from rfm import CandidateSet, SplitPlan, depths, max_abs_rowsum_norm, rfm_location, rfm_scatter
from rfm.simulate import ContaminatedGaussianSpec, gen_contaminated_gaussian

spec = ContaminatedGaussianSpec(d=5, p=0.2, n=50_000, seed=3)
X, flags = gen_contaminated_gaussian(spec)
print(f"{flags.mean():.1%} of rows are outliers")

plan = SplitPlan.for_size(len(X), 50)

# The sample mean is dragged towards the outliers.
print("sample mean error:", np.linalg.norm(X.mean(axis=0)))

# Deepest block estimate, and the average of the 40% deepest.
loc = rfm_location(X, plan, n_jobs=4)
loc40 = rfm_location(X, plan, fuse_rule="deepest40", n_jobs=4)
print("fused location error:", np.linalg.norm(loc.estimate))
print("40% average error:   ", np.linalg.norm(loc40.estimate))
print("block", loc.chosen, "has depth", loc.depths[loc.chosen].round(3))

# Scatter matrices are compared under the maximum absolute row sum norm.
sc = rfm_scatter(X, plan, n_jobs=4)
print("fused scatter error: ", max_abs_rowsum_norm(sc.estimate - spec.cov))
print("sample covariance error:", max_abs_rowsum_norm(np.cov(X.T) - spec.cov))

# The depth of each block estimate is also available directly.
dep = depths(CandidateSet(sc.candidates, "max_abs_rowsum"))
print("depth range over blocks:", dep.min().round(3), dep.max().round(3))
