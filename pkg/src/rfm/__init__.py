"""Robust fusion of subsample estimates for large samples.

Split the data into ``m`` subsamples, compute a robust estimate on each, and
combine the estimates robustly: by the deepest candidate under spatial
depth, by the average of the 40% deepest candidates, or, for clustering,
by a second trimmed k-means pass over the pooled subsample centers.
"""
from .covop import (FunctionalData, RankOneDistances, TrimmedCovEstimate,
                    empirical_cov_kernel, impartial_trimmed_cov, median_center,
                    pairwise_hs_distance)
from .depth import CandidateSet, deepest, deepest_trimmed_mean, depths, spatial_depth
from .fusion import (ClusterFusionResult, FusionResult, SplitPlan, SubsampleError,
                     plan_split, rfm_cluster, rfm_covariance, rfm_estimate, rfm_location,
                     rfm_scatter, split)
from .norms import CovKernel, euclidean_norm, hs_inner, hs_norm, max_abs_rowsum_norm
from .robust import (LocScatterEstimate, MEstimatorConfig, SingularScatterError, mad,
                     m_estimate_loc_scatter, median1d, shorth)
from .tkmeans import (ITkMConfig, TrimmedKMeansResult, assign_labels, dist_to_centerset,
                      itkm, matching_error)

__version__ = "0.1.0"
