import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import multivariate_normal

from kineme.codebook import CodebookConfig
from kineme.exceptions import DimensionMismatch, TooFewPoints
from kineme.mixture import GaussianMixture, GaussianMixtureEM, cluster_centroids, gmm_fit, gmm_posterior


def two_clusters(seed=0, n=500, sigma=0.1):
    g = np.random.default_rng(seed)
    return np.vstack([g.normal(0, sigma, (n, 2)), g.normal(10, sigma, (n, 2))])


def test_two_cluster_recovery():
    m = gmm_fit(two_clusters(), k=2, seed=0)
    means = m.means[np.argsort(m.means[:, 0])]
    np.testing.assert_allclose(means, [[0, 0], [10, 10]], atol=0.05)
    assert np.all(np.diff(m.log_likelihood_trace) >= -1e-9)


def test_single_component_is_sample_moments(rng):
    X = rng.normal(2, 3, (200, 3))
    m = gmm_fit(X, k=1)
    np.testing.assert_allclose(m.means[0], X.mean(axis=0), atol=1e-9)
    np.testing.assert_allclose(m.variances[0], X.var(axis=0), atol=1e-9)
    np.testing.assert_allclose(m.weights, [1.0])


def test_default_component_count():
    assert CodebookConfig().n_kinemes == 16


@given(st.integers(0, 2**31 - 1), st.sampled_from(["diag", "full"]))
def test_trace_monotone(seed, cov):
    g = np.random.default_rng(seed)
    X = np.vstack([g.normal(c, 0.5, (60, 3)) for c in (0, 2, 4)])
    m = gmm_fit(X, k=3, seed=seed, covariance_type=cov, max_iters=80)
    assert np.all(np.diff(m.log_likelihood_trace) >= -1e-9)
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(m.weights >= 0)
    if cov == "diag":
        assert m.variances.min() >= 1e-6


@given(st.integers(0, 2**31 - 1))
def test_posterior_is_probability_vector(seed):
    g = np.random.default_rng(seed)
    X = g.normal(size=(80, 2))
    m = gmm_fit(X, k=4, seed=seed, max_iters=30)
    p = gmm_posterior(m, g.normal(size=2) * 5)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-9)


def _manual(weights, means, variances):
    return GaussianMixture(np.array(weights, float), np.array(means, float), np.array(variances, float))


def test_posterior_examples():
    one = _manual([1.0], [[1.0, 2.0]], [[1.0, 1.0]])
    np.testing.assert_allclose(gmm_posterior(one, np.array([5.0, -3.0])), [1.0])
    sym = _manual([0.5, 0.5], [[-1.0, 0.0], [1.0, 0.0]], [[1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(gmm_posterior(sym, np.array([0.0, 0.0])), [0.5, 0.5])
    far = _manual([0.3, 0.7], [[0.0, 0.0], [6.0, 6.0]], [[0.1, 0.1], [0.1, 0.1]])
    p = gmm_posterior(far, np.array([0.0, 0.0]))
    dens = [w * multivariate_normal(mu, np.diag(v)).pdf([0, 0]) for w, mu, v in
            zip(far.weights, far.means, far.variances)]
    np.testing.assert_allclose(p, np.array(dens) / sum(dens), rtol=1e-9)
    assert p[0] >= 0.999
    with pytest.raises(DimensionMismatch):
        gmm_posterior(far, np.zeros(3))


def test_centroids():
    one = _manual([1.0], [[1.0, 2.0]], [[1.0, 1.0]])
    np.testing.assert_array_equal(cluster_centroids(one), [[1.0], [2.0]])
    X = np.vstack([np.tile([1.0, 5.0], (30, 1)), np.tile([4.0, -2.0], (50, 1))])
    C = cluster_centroids(gmm_fit(X, k=2))
    cols = sorted(map(tuple, C.T))
    np.testing.assert_allclose(cols, [(1.0, 5.0), (4.0, -2.0)], atol=1e-6)


@given(st.integers(0, 2**31 - 1))
def test_permutation_invariance_with_box_init(seed):
    g = np.random.default_rng(seed)
    X = np.vstack([g.normal(0, 1, (40, 2)), g.normal(5, 1, (40, 2))])
    a = gmm_fit(X, k=2, seed=1, init="box", max_iters=50)
    b = gmm_fit(X[g.permutation(len(X))], k=2, seed=1, init="box", max_iters=50)
    assert a.mean_log_likelihood(X) == pytest.approx(b.mean_log_likelihood(X), abs=1e-9)


def test_too_few_points(rng):
    with pytest.raises(TooFewPoints):
        gmm_fit(rng.normal(size=(3, 2)), k=4)


def test_estimator_api():
    X = two_clusters(1, 100)
    est = GaussianMixtureEM(n_components=2, random_state=0).fit(X)
    labels = est.predict(X)
    assert set(labels[:100]) != set(labels[100:])
    assert est.predict_proba(X).shape == (200, 2)
