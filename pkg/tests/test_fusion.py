import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kineme.analytics.fusion import ALPHA_GRID, DecisionFusion, fuse_decisions
from kineme.exceptions import LengthMismatch


def test_grid():
    assert len(ALPHA_GRID) == 101 and ALPHA_GRID[0] == 0.0 and ALPHA_GRID[-1] == 1.0
    np.testing.assert_allclose(np.diff(ALPHA_GRID), 0.01)


def test_exact_kin_recovers_alpha_one(rng):
    gt = rng.random(50)
    noise = rng.random(50)
    assert fuse_decisions(gt, noise, gt, "regression").alpha == 1.0
    # thresholded F1 saturates for every alpha past the crossing point; the tie rule keeps the smallest
    labels = (gt > 0.5).astype(int)
    res = fuse_decisions(labels.astype(float), noise, labels, "classification")
    assert res.metric == 1.0 and res.curve[-1] == 1.0


def test_identical_scores_tie_to_zero(rng):
    p = rng.random(30)
    res = fuse_decisions(p, p, rng.random(30), "regression")
    assert res.alpha == 0.0
    assert np.ptp(res.curve) <= 1e-12


@given(st.integers(0, 2**31 - 1), st.sampled_from(["regression", "classification"]))
def test_fused_dominates_unimodal(seed, mode):
    g = np.random.default_rng(seed)
    ref = g.random(40)
    if mode == "classification":
        ref = (ref > 0.5).astype(int)
    res = fuse_decisions(g.random(40), g.random(40), ref, mode)
    assert res.alpha in set(ALPHA_GRID.tolist())
    assert abs(res.alpha * 100 - round(res.alpha * 100)) < 1e-9
    assert res.metric >= max(res.metric_kin, res.metric_au)
    assert np.all(np.isfinite(res.scores))


def test_test_scores_use_alpha(rng):
    gt = rng.random(20)
    res = fuse_decisions(gt, rng.random(20), gt, "regression", np.array([0.2, 0.4]), np.array([0.8, 0.6]))
    np.testing.assert_allclose(res.scores, [0.2, 0.4])
    with pytest.raises(LengthMismatch):
        fuse_decisions([0.1, 0.2], [0.1], [0.1, 0.2])


def test_estimator(rng):
    gt = rng.random(20)
    X = np.column_stack([gt, rng.random(20)])
    f = DecisionFusion().fit(X, gt)
    assert f.alpha_ == 1.0
    np.testing.assert_allclose(f.predict(X), gt)
