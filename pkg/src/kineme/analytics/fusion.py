"""Decision-level fusion of kineme and AU predictor scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ConfigError, LengthMismatch
from .metrics import as_binary, f1_score, pearson

ALPHA_GRID = np.round(np.arange(101) / 100.0, 2)
TIE_TOL = 1e-12


@dataclass(eq=False)
class FusionResult:
    alpha: float
    scores: np.ndarray  # fused scores (test scores when supplied, else validation)
    metric: float  # selection metric at alpha on the validation data
    curve: np.ndarray  # validation metric at every grid value
    metric_kin: float  # alpha = 1
    metric_au: float  # alpha = 0


def _metric(fused, reference, mode):
    if mode == "regression":
        return pearson(fused, reference)[0]
    return f1_score((fused > 0.5).astype(int), reference)


def fuse_decisions(p_kin, p_au, reference, mode="regression", test_kin=None, test_au=None):
    """Grid-search ``alpha`` in steps of 0.01 for ``alpha*p_kin + (1-alpha)*p_au``.

    The selection metric is PCC (regression) or F1 of the fused score
    thresholded at 0.5 (classification). Ties within ``1e-12`` resolve to the
    smallest ``alpha``.
    """
    p_kin = np.asarray(p_kin, dtype=float)
    p_au = np.asarray(p_au, dtype=float)
    if p_kin.shape != p_au.shape or p_kin.shape[0] != len(reference):
        raise LengthMismatch("p_kin, p_au and reference must have equal lengths")
    if mode not in ("regression", "classification"):
        raise ConfigError(f"unknown fusion mode {mode!r}")
    ref = np.asarray(reference, dtype=float) if mode == "regression" else as_binary(reference)
    curve = np.array([_metric(a * p_kin + (1 - a) * p_au, ref, mode) for a in ALPHA_GRID])
    best = int(np.flatnonzero(curve >= curve.max() - TIE_TOL)[0])
    alpha = float(ALPHA_GRID[best])
    if test_kin is not None:
        test_kin = np.asarray(test_kin, dtype=float)
        test_au = np.asarray(test_au, dtype=float)
        if test_kin.shape != test_au.shape:
            raise LengthMismatch("test_kin and test_au differ in length")
        fused = alpha * test_kin + (1 - alpha) * test_au
    else:
        fused = alpha * p_kin + (1 - alpha) * p_au
    return FusionResult(alpha, fused, float(curve[best]), curve, float(curve[-1]), float(curve[0]))


class DecisionFusion(BaseEstimator):
    """Learns the fusion weight on validation scores.

    ``X`` is an ``(n, 2)`` array of ``[p_kin, p_au]`` columns.
    """

    def __init__(self, mode="regression"):
        self.mode = mode

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.result_ = fuse_decisions(X[:, 0], X[:, 1], y, self.mode)
        self.alpha_ = self.result_.alpha
        return self

    def decision_function(self, X):
        check_is_fitted(self, "alpha_")
        X = np.asarray(X, dtype=float)
        return self.alpha_ * X[:, 0] + (1 - self.alpha_) * X[:, 1]

    def predict(self, X):
        fused = self.decision_function(X)
        return (fused > 0.5).astype(int) if self.mode == "classification" else fused
