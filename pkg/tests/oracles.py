"""Slow reference implementations used as independent oracles by the tests."""
import itertools
import math

import numpy as np


def spatial_depth_loop(x, items, normfn):
    total = np.zeros_like(np.asarray(x, dtype=float))
    for X in items:
        dist = normfn(X - x)
        if dist > 0:
            total = total + (X - x) / dist
    return 1.0 - normfn(total / len(items))


def euclid(v):
    return math.sqrt(sum(float(t) * float(t) for t in np.ravel(v)))


def rowsum(M):
    return max(sum(abs(float(v)) for v in row) for row in M)


def hs_weighted(w):
    def norm(K):
        return math.sqrt(sum(float(K[s, t]) ** 2 * w[s] * w[t]
                             for s in range(len(w)) for t in range(len(w))))
    return norm


def trimmed_kmeans_exhaustive(X, k, n_trim):
    """Global optimum of the trimmed k-means loss by full enumeration.

    Every retained subset and every assignment of it to ``k`` non-empty
    groups is tried; the loss is the mean within-group squared deviation
    around the group means.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    keep = n - n_trim
    best = math.inf
    for subset in itertools.combinations(range(n), keep):
        S = X[list(subset)]
        for lab in itertools.product(range(k), repeat=keep):
            if lab[0] != 0 or len(set(lab)) < k:  # fix the first label to skip relabelings
                continue
            lab = np.array(lab)
            sse = 0.0
            for j in range(k):
                G = S[lab == j]
                sse += float(np.sum((G - G.mean(axis=0)) ** 2))
            best = min(best, sse / keep)
    return best


def matching_error_bruteforce(y, yhat, k):
    y = list(y)
    yhat = list(yhat)
    best = 1.0
    for perm in itertools.permutations(range(k + 1)):
        miss = sum(1 for a, b in zip(y, yhat) if a != perm[b])
        best = min(best, miss / len(y))
    return best
