"""
Trimmed k-means on blocks
=========================

Three planar clusters and a diffuse cloud of outliers that avoids the
clusters' cores.  Trimmed k-means runs on every block; the pooled centers
are clustered once more and every point goes to its nearest fused center.
"""

import numpy as np

from rfm import ITkMConfig, SplitPlan, itkm, matching_error, rfm_cluster
from rfm.simulate import ThreeClusterSpec, gen_three_clusters

X, y = gen_three_clusters(ThreeClusterSpec(fac=10, seed=5))
print(X.shape, "points,", np.mean(y == 0).round(3), "outlier fraction")

cfg = ITkMConfig(n_starts=20, seed=1)
whole = itkm(X, k=3, alpha=0.35, config=cfg)
print("whole-sample centers:\n", whole.centers.round(2))
print("matching error:", round(matching_error(y, whole.labels, 3), 4))

fused = rfm_cluster(X, SplitPlan.for_size(len(X), 10), k=3, alpha1=0.35, alpha2=0.1,
                    config=cfg, n_jobs=4)
print("fused centers:\n", fused.centers.round(2))
print("matching error:", round(matching_error(y, fused.labels, 3), 4))
print("pooled centers:", sum(len(c) for c in fused.subsample_centers))
