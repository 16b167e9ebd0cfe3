"""
Median of subsample medians
===========================

Split a sample into ``m`` blocks of ``l = 2k + 1`` points, take the median of
each block and then the median of those medians.  This costs some
efficiency at the normal model but keeps most of the breakdown point.
"""

import numpy as np

from rfm.simulate import (EfficiencyModel, breakdown_mc, efficiency_study,
                          median_of_medians_variance)

# Variance ratio of the plain median to the median of medians.  For large
# blocks it approaches 2/pi.
for k in (0, 2, 10, 20):
    ratio = efficiency_study(k, m=200, reps=1000, seed=1)
    print(f"k={k:3d}  l={2 * k + 1:3d}  ratio={ratio:.3f}")
print(f"limit 2/pi = {2 / np.pi:.4f}")

# The same variance from the density of a block median.
k, m = 20, 200
_, _, v_mc = efficiency_study(k, m, reps=2000, seed=2, return_variances=True)
v_plugin = median_of_medians_variance(k, m, model=EfficiencyModel(k))
print(f"Monte Carlo {v_mc:.3e}  vs  density plug-in {v_plugin:.3e}")

# Breakdown: each observation is an outlier with probability p.  A block
# breaks when half of it is bad, the fused median when half of the blocks
# break.  Close to p = 1/2 many small blocks break down much more often.
rows = breakdown_mc(30_000, [5, 30, 150], [0.45, 0.49, 0.495, 0.499], reps=2000, seed=1)
print("   m     p   breakdown")
for r in rows:
    print(f"{r['m']:4d}  {r['p']:.3f}  {r['breakdown']:.4f}")
