import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import nnls as scipy_nnls

from kineme.exceptions import DimensionMismatch, NegativeInput, RankTooLarge
from kineme.factorization import MultiplicativeNMF, nmf_fit, nnls_project, nnls_project_many


def brute_force_nnls(B, h):
    """Solve every passive-set least squares and keep the best feasible one."""
    r = B.shape[1]
    best, best_val = np.zeros(r), np.sum(h**2)
    for k in range(1, r + 1):
        for S in itertools.combinations(range(r), k):
            c = np.zeros(r)
            c[list(S)] = np.linalg.lstsq(B[:, S], h, rcond=None)[0]
            if np.all(c >= 0):
                val = np.sum((h - B @ c) ** 2)
                if val < best_val:
                    best, best_val = c, val
    return best


def kkt_ok(B, h, c):
    tau = 1e-6 * np.max(np.abs(B.T @ h))
    g = B.T @ (B @ c - h)
    active = c == 0
    return np.all(c >= 0) and np.all(g[active] >= -tau) and np.all(np.abs(g[~active]) <= tau)


def test_rank2_exact_recovery(rng):
    B0 = rng.random((30, 2))
    C0 = rng.random((2, 40))
    H = B0 @ C0
    f = nmf_fit(H, 2, max_iters=5000, rel_tol=0, seed=1)
    assert np.linalg.norm(H - f.basis @ f.coefficients) / np.linalg.norm(H) <= 1e-3


def test_rank1_outer_product(rng):
    H = np.outer(rng.random(20) + 0.1, rng.random(15) + 0.1)
    f = nmf_fit(H, 1, max_iters=500, rel_tol=0)
    assert np.linalg.norm(H - f.basis @ f.coefficients) / np.linalg.norm(H) <= 1e-6


def test_zero_column_gets_zero_coefficients(rng):
    H = rng.random((12, 20))
    H[:, 5] = 0
    f = nmf_fit(H, 3, max_iters=300, rel_tol=0)
    assert np.abs(f.coefficients[:, 5]).max() < 1e-6


@given(st.integers(0, 2**31 - 1))
def test_nmf_monotone_and_nonnegative(seed):
    H = np.random.default_rng(seed).random((18, 25))
    f = nmf_fit(H, 4, max_iters=60, rel_tol=0, seed=seed)
    trace = np.asarray(f.objective_trace)
    assert np.all(np.diff(trace) <= 1e-10)
    assert f.basis.min() >= 0 and f.coefficients.min() >= 0
    assert f.final_objective == pytest.approx(np.linalg.norm(H - f.basis @ f.coefficients))


def test_nmf_deterministic(rng):
    H = rng.random((10, 12))
    a, b = nmf_fit(H, 3, seed=7), nmf_fit(H, 3, seed=7)
    np.testing.assert_array_equal(a.basis, b.basis)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_nmf_errors(rng):
    with pytest.raises(NegativeInput):
        nmf_fit(-rng.random((5, 5)), 2)
    with pytest.raises(RankTooLarge):
        nmf_fit(rng.random((5, 4)), 5)


def test_nnls_examples():
    c = nnls_project(np.array([3.0, 4.0]), np.eye(2))
    np.testing.assert_allclose(c.values, [3, 4])
    assert c.residual == pytest.approx(0, abs=1e-12)
    B = np.array([[1.0], [1.0]])
    np.testing.assert_allclose(nnls_project(np.array([1.0, 2.0]), B).values, [1.5])
    np.testing.assert_allclose(nnls_project(np.array([-1.0, -2.0]), B).values, [0.0])
    with pytest.raises(DimensionMismatch):
        nnls_project(np.zeros(3), B)


@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_nnls_matches_brute_force(seed, r):
    g = np.random.default_rng(seed)
    B = g.normal(size=(8, r))
    h = g.normal(size=8)
    c = nnls_project(h, B).values
    assert kkt_ok(B, h, c)
    np.testing.assert_allclose(c, brute_force_nnls(B, h), atol=1e-8)


@given(st.integers(0, 2**31 - 1))
def test_nnls_against_scipy(seed):
    g = np.random.default_rng(seed)
    B = g.random((20, 6))
    h = g.normal(size=20)
    np.testing.assert_allclose(nnls_project(h, B).values, scipy_nnls(B, h)[0], atol=1e-9)


@given(st.integers(0, 2**31 - 1))
def test_nnls_recovers_feasible_coefficients(seed):
    g = np.random.default_rng(seed)
    B = g.random((15, 4)) + np.eye(15, 4)
    c0 = g.random(4)
    c0[g.integers(4)] = 0.0
    c = nnls_project(B @ c0, B).values
    assert np.linalg.norm(c - c0) <= 1e-6


def test_project_many_matches_single(rng):
    B = rng.random((9, 3))
    H = rng.normal(size=(9, 5))
    many = nnls_project_many(H, B)
    for j in range(5):
        np.testing.assert_allclose(many[:, j], nnls_project(H[:, j], B).values)


def test_estimator_api(rng):
    X = rng.random((40, 10))
    est = MultiplicativeNMF(n_components=3, max_iter=200)
    W = est.fit_transform(X)
    assert W.shape == (40, 3)
    assert est.get_params()["n_components"] == 3
    # exact NNLS projection reconstructs at least as well as the fitted coefficients
    B = est.components_
    assert np.linalg.norm(X - est.transform(X) @ B) <= np.linalg.norm(X - W @ B) + 1e-9
