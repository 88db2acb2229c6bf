"""Linear regression on the leading principal components of raw pose chunks."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import DataError, DegenerateCovariance, LengthMismatch


class PCARegression(RegressorMixin, BaseEstimator):
    """Keep the fewest components reaching ``variance`` explained, then fit least squares.

    Attributes
    ----------
    n_components_ : int
    explained_variance_ratio_ : ndarray
        Ratio for every component of the centred training data.
    """

    def __init__(self, variance=0.90):
        self.variance = variance

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.shape[0] < 2:
            raise DataError("need at least two training rows")
        if y.shape[0] != X.shape[0]:
            raise LengthMismatch(f"{X.shape[0]} rows vs {y.shape[0]} targets")
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        _, s, vt = np.linalg.svd(Xc, full_matrices=False)
        var = s**2
        total = var.sum()
        if total <= 0:
            raise DegenerateCovariance("all training features are constant")
        ratio = var / total
        cum = np.cumsum(ratio)
        self.explained_variance_ratio_ = ratio
        self.n_components_ = int(np.searchsorted(cum, self.variance - 1e-12) + 1)
        self.components_ = vt[: self.n_components_]
        Z = Xc @ self.components_.T
        self.intercept_ = float(y.mean())
        self.coef_ = np.linalg.lstsq(Z, y - self.intercept_, rcond=None)[0]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        return (X - self.mean_) @ self.components_.T @ self.coef_ + self.intercept_


def pca_linreg(train_features, train_targets, test_features, variance=0.90):
    """Fit :class:`PCARegression` on the training rows and predict ``test_features``."""
    return PCARegression(variance).fit(train_features, train_targets).predict(test_features)
