import math

import numpy as np
import pytest
from scipy import integrate, stats

from rfm.simulate import (ContaminatedGaussianSpec, EfficiencyModel, KrausModelSpec,
                          ThreeClusterSpec, breakdown_mc, chi2_2_quantile,
                          efficiency_study, gen_contaminated_gaussian, gen_kraus,
                          gen_three_clusters, inside_cluster_ellipsoids, kraus_basis,
                          kraus_true_kernel, kraus_variance, mean_error, median_density,
                          median_of_medians_variance, mse_report, simulate_cluster,
                          simulate_covop, simulate_location, simulate_scatter)


def test_gaussian_moments_without_outliers():
    X, flags = gen_contaminated_gaussian(ContaminatedGaussianSpec(p=0.0, seed=1))
    assert not flags.any()
    emp = np.cov(X.T)
    assert np.max(np.abs(emp - ContaminatedGaussianSpec().cov)) < 0.02


def test_all_outliers():
    X, flags = gen_contaminated_gaussian(ContaminatedGaussianSpec(p=1.0, n=500, seed=2))
    assert flags.all()
    assert abs(np.median(X) - 50) < 1


def test_outlier_fraction():
    _, flags = gen_contaminated_gaussian(ContaminatedGaussianSpec(p=0.2, seed=3))
    assert abs(flags.mean() - 0.2) < 0.005


def test_bad_spec():
    with pytest.raises(ValueError):
        ContaminatedGaussianSpec(off_diag=1.0)
    with pytest.raises(ValueError):
        gen_contaminated_gaussian(ContaminatedGaussianSpec(d=3, off_diag=-0.9, n=10))
    with pytest.raises(ValueError):
        KrausModelSpec(n_grid=1)


def test_kraus_variance_formula():
    t = np.linspace(0, 1, 20)
    want = np.zeros(20)
    for k in range(1, 11):
        want += 2 * k ** -6.0 * np.sin(2 * np.pi * k * t) ** 2
        want += 2 * (1 / 3) ** (2 * k) * np.cos(2 * np.pi * k * t) ** 2
    np.testing.assert_allclose(kraus_variance(t), want, rtol=1e-12)
    np.testing.assert_allclose(np.diag(kraus_true_kernel(t).values), want, rtol=1e-12)


def test_kraus_monte_carlo_variance():
    fd, _ = gen_kraus(KrausModelSpec(n=100_000, p=0.0, seed=4))
    var = fd.values.var(axis=0)
    want = kraus_variance(fd.grid)
    assert np.all(np.abs(var / want - 1) < 0.05)


def test_kraus_outliers_shifted():
    fd, flags = gen_kraus(KrausModelSpec(n=20_000, p=0.3, seed=5))
    assert abs(flags.mean() - 0.3) < 0.02
    shift = fd.values[flags].mean(axis=0) - fd.values[~flags].mean(axis=0)
    np.testing.assert_allclose(shift, 2 - 8 * np.sin(np.pi * fd.grid), atol=0.1)


def test_kraus_single_component_rank_one():
    A, _ = kraus_basis(np.linspace(0, 1, 20))
    a = np.random.default_rng(0).standard_normal(50)
    V = np.outer(a, A[0])
    assert np.linalg.matrix_rank(V) == 1


def test_chi2_two_quantile():
    q = chi2_2_quantile(0.75)
    assert q == pytest.approx(2.772588722239781, rel=1e-15)
    assert stats.chi2.cdf(q, 2) == pytest.approx(0.75, rel=1e-12)


def test_three_clusters():
    X, y = gen_three_clusters(ThreeClusterSpec(fac=10, seed=6))
    assert [int(np.sum(y == j)) for j in (1, 2, 3, 0)] == [150, 300, 300, 400]
    assert np.mean(y == 0) == pytest.approx(40 / 115)
    assert not inside_cluster_ellipsoids(X[y == 0], ThreeClusterSpec()).any()
    spec = ThreeClusterSpec()
    for j, mu in enumerate(spec.means, start=1):
        d2 = np.sum((X[y == 0] - mu) ** 2, axis=1) / 1.5
        assert d2.min() > chi2_2_quantile(0.75)
        assert np.allclose(X[y == j].mean(axis=0), mu, atol=0.5)


def test_generators_deterministic():
    a, _ = gen_contaminated_gaussian(ContaminatedGaussianSpec(n=1000, seed=9))
    b, _ = gen_contaminated_gaussian(ContaminatedGaussianSpec(n=1000, seed=9))
    assert a.tobytes() == b.tobytes()
    a, _ = gen_kraus(KrausModelSpec(n=100, seed=9))
    b, _ = gen_kraus(KrausModelSpec(n=100, seed=9))
    assert a.values.tobytes() == b.values.tobytes()
    a, ya = gen_three_clusters(ThreeClusterSpec(fac=2, seed=9))
    b, yb = gen_three_clusters(ThreeClusterSpec(fac=2, seed=9))
    assert a.tobytes() == b.tobytes() and ya.tobytes() == yb.tobytes()


def test_median_density_k0_is_parent():
    y = np.linspace(-4, 4, 41)
    np.testing.assert_allclose(median_density(y, EfficiencyModel(0)), stats.norm.pdf(y),
                               rtol=1e-13)


@pytest.mark.parametrize("k", [0, 1, 5, 10, 20, 30])
def test_median_density_integrates_to_one(k):
    model = EfficiencyModel(k)
    total, _ = integrate.quad(lambda y: float(median_density(y, model)), -np.inf, np.inf,
                              epsabs=1e-12, epsrel=1e-12)
    assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("k", [0, 3, 10])
def test_median_density_at_center(k):
    want = 0.5 ** (2 * k) * math.factorial(2 * k + 1) / math.factorial(k) ** 2 \
        * stats.norm.pdf(0)
    assert float(median_density(0.0, EfficiencyModel(k))) == pytest.approx(want, rel=1e-12)


def test_efficiency_k0():
    assert efficiency_study(0, 50, 200, seed=3) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        efficiency_study(1, 5, 10)


def test_plugin_variance_cross_check():
    _, _, v_fused = efficiency_study(10, 100, 4000, seed=8, return_variances=True)
    assert v_fused == pytest.approx(median_of_medians_variance(10, 100), rel=0.10)


def test_breakdown_zero_p():
    rows = breakdown_mc(3000, [3, 5, 30], [0.0], 200, seed=0)
    assert all(r["breakdown"] == 0 for r in rows)


def test_breakdown_monotone_in_p():
    ps = np.linspace(0.3, 0.7, 17)
    rows = breakdown_mc(3000, [5, 30], ps, 500, seed=2)
    for m in (5, 30):
        freq = [r["breakdown"] for r in rows if r["m"] == m]
        assert all(a <= b for a, b in zip(freq, freq[1:]))
    assert rows[-1]["breakdown"] == 1.0


def test_breakdown_reports_discarded():
    rows = breakdown_mc(1000, [7], [0.1], 100)
    assert rows[0]["l"] == 142 and rows[0]["discarded"] == 6


def breakdown_direct(n, m, p, reps, rng):
    """Bernoulli-level simulation with explicit subsample counting."""
    l = n // m  # noqa: E741
    hits = 0
    for _ in range(reps):
        B = rng.random(m * l) < p
        S = B.reshape(m, l).sum(axis=1)
        hits += int(np.sum(2 * S >= l) * 2 >= m)
    return hits / reps


def test_breakdown_matches_bernoulli_simulation():
    rng = np.random.default_rng(11)
    for m, p in [(5, 0.49), (15, 0.495)]:
        want = breakdown_direct(3000, m, p, 3000, rng)
        got = breakdown_mc(3000, [m], [p], 3000, seed=4)[0]["breakdown"]
        assert got == pytest.approx(want, abs=0.04)


def test_mse_report_examples():
    truth = np.zeros(3)
    assert mse_report(np.zeros((4, 3)), truth) == 0
    assert mse_report(np.array([[3.0, 4.0, 0.0]]), truth) == 25.0


def test_mse_report_loop_oracle():
    rng = np.random.default_rng(12)
    E = rng.standard_normal((7, 4))
    T = rng.standard_normal(4)
    want = sum(sum((E[r, i] - T[i]) ** 2 for i in range(4)) for r in range(7)) / 7
    assert mse_report(E, T) == pytest.approx(want, rel=1e-13)
    M = rng.standard_normal((5, 3, 3))
    M = M + M.transpose(0, 2, 1)
    want = sum(max(sum(abs(v) for v in row) for row in m) for m in M) / 5
    assert mean_error(M, np.zeros((3, 3)), "max_abs_rowsum") == pytest.approx(want)
    with pytest.raises(ValueError):
        mse_report(E, np.zeros(5))


def test_small_studies_run():
    row = simulate_location(n=2000, m=10, reps=2, seed=1)
    assert set(row) >= {"MLE", "ROB", "avROB", "RFM1", "RFM"}
    assert row["RFM"] < row["MLE"]
    row = simulate_scatter(n=2000, m=10, reps=1, seed=1, timings=True)
    assert row["RFM"] < row["MLE"] and "T0" in row
    row = simulate_covop(n=1000, m=5, reps=1, seed=1, global_robust=True)
    assert row["ROB"] < row["MLE"]
    row = simulate_cluster(fac=2, m=2, reps=1)
    assert 0 <= row["ME1"] <= 1 and 0 <= row["ME2"] <= 1
