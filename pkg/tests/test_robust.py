import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from rfm.norms import max_abs_rowsum_norm
from rfm.robust import (MEstimatorConfig, SingularScatterError, chi2_median, mad, median1d,
                        m_estimate_loc_scatter, shorth)


def windows_oracle(xs):
    """Enumerate every window of ceil(n/2) sorted points; leftmost narrowest wins."""
    s = sorted(xs)
    n = len(s)
    h = -(-n // 2)
    best = None
    for i in range(n - h + 1):
        w = s[i + h - 1] - s[i]
        if best is None or w < best[0]:
            best = (w, sum(s[i:i + h]) / h)
    return best[1]


def test_median_examples():
    assert median1d([1, 2, 3]) == 2
    assert median1d([1, 2, 3, 4]) == 2.5
    with pytest.raises(ValueError):
        median1d([])


def test_median_sort_oracle():
    rng = np.random.default_rng(0)
    for n in range(1, 40):
        xs = rng.standard_normal(n)
        s = sorted(xs)
        want = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
        assert median1d(xs) == want


def test_mad_normal_consistency():
    xs = np.random.default_rng(1).standard_normal(200_000)
    assert mad(xs) == pytest.approx(1.0, abs=0.01)
    assert mad([1, 2, 3, 4, 100], normalize=False) == 1


def test_shorth_examples():
    assert shorth([0, 0.1, 0.2, 10]) == pytest.approx(0.05)
    assert shorth([-1, 0, 1]) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        shorth([1.0])


def test_shorth_enumeration():
    rng = np.random.default_rng(2)
    for n in range(2, 30):
        xs = rng.standard_normal(n).round(1)  # rounding forces width ties
        assert shorth(xs) == pytest.approx(windows_oracle(xs), abs=1e-12)


def test_shorth_resists_contaminating_component():
    rng = np.random.default_rng(3)
    n = 10_000
    good = rng.uniform(-1, 1, int(0.6 * n))
    bad = rng.uniform(3, 4, n - good.size)
    assert abs(shorth(np.concatenate([good, bad]))) < 0.2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40), st.randoms())
def test_permutation_invariance(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert median1d(ys) == median1d(xs)
    assert shorth(ys) == shorth(xs)


@pytest.mark.parametrize("df", [1, 2, 5, 10, 50])
def test_chi2_median(df):
    assert chi2_median(df) == pytest.approx(stats.chi2.ppf(0.5, df), rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        MEstimatorConfig(tuning_c=0)
    with pytest.raises(ValueError):
        MEstimatorConfig(max_iter=0)
    with pytest.raises(ValueError):
        MEstimatorConfig(tol=0)


def test_clean_gaussian():
    X = np.random.default_rng(4).standard_normal((10_000, 5))
    est = m_estimate_loc_scatter(X)
    assert est.converged
    assert np.linalg.norm(est.location) < 0.1
    assert max_abs_rowsum_norm(est.scatter - np.eye(5)) < 0.2


def test_point_mass_contamination():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((10_000, 5))
    X[:2000] = 50.0
    est = m_estimate_loc_scatter(X)
    assert np.linalg.norm(est.location) < 0.2
    assert np.linalg.norm(X.mean(axis=0)) == pytest.approx(10 * np.sqrt(5), rel=0.05)


def test_identical_points_singular():
    with pytest.raises(SingularScatterError):
        m_estimate_loc_scatter(np.ones((50, 3)))


def test_too_few_observations():
    with pytest.raises(ValueError, match="more observations"):
        m_estimate_loc_scatter(np.random.default_rng(6).standard_normal((3, 3)))


def test_affine_equivariance():
    rng = np.random.default_rng(7)
    cfg = MEstimatorConfig(tol=1e-11, max_iter=1000)
    for _ in range(5):
        # unimodal heavy tails: one fixed point, so both runs reach the same solution
        X = rng.standard_t(4, size=(400, 3))
        A = rng.standard_normal((3, 3))
        while abs(np.linalg.det(A)) < 0.3:
            A = rng.standard_normal((3, 3))
        b = rng.standard_normal(3) * 5
        e1 = m_estimate_loc_scatter(X, cfg)
        e2 = m_estimate_loc_scatter(X @ A.T + b, cfg)
        np.testing.assert_allclose(e2.location, A @ e1.location + b, rtol=1e-6, atol=1e-6)
        np.testing.assert_allclose(e2.scatter, A @ e1.scatter @ A.T, rtol=1e-6, atol=1e-6)


def test_scatter_symmetric_psd():
    rng = np.random.default_rng(8)
    for d, n in itertools.product([1, 2, 4], [20, 300]):
        X = rng.standard_t(2, size=(n, d))
        S = m_estimate_loc_scatter(X).scatter
        np.testing.assert_array_equal(S, S.T)
        assert np.linalg.eigvalsh(S).min() >= -1e-8 * np.trace(S)
