"""Non-negative factorization of the head-motion matrix and projection of new
segments onto the learned basis."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError, DimensionMismatch, NegativeInput, RankTooLarge

EPS = 1e-12


@dataclass(eq=False)
class FactorPair:
    """``H ~= basis @ coefficients`` with both factors non-negative."""

    basis: np.ndarray
    coefficients: np.ndarray
    final_objective: float
    objective_trace: list = field(default_factory=list)
    n_iter: int = 0

    @property
    def rank(self):
        return self.basis.shape[1]


@dataclass(eq=False)
class CoeffVector:
    values: np.ndarray
    residual: float


def _objective(H, B, C):
    return float(np.linalg.norm(H - B @ C))


def nmf_fit(H, rank, max_iters=500, rel_tol=1e-6, seed=0):
    """Factor a non-negative ``(d, n)`` matrix by Lee-Seung multiplicative updates.

    The Frobenius error never increases from one iteration to the next. Both
    factors start from seeded uniform(0, 1] draws scaled to the data mean.

    Parameters
    ----------
    H : array-like of shape (d, n)
        Entrywise non-negative; a :class:`~kineme.pose.SegmentMatrix` is accepted.
    rank : int
    max_iters : int
    rel_tol : float
        Stop once ``(prev - cur) / prev`` drops below this value.
    seed : int

    Returns
    -------
    FactorPair
    """
    H = getattr(H, "columns", H)
    H = np.asarray(H, dtype=float)
    if H.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise NegativeInput("matrix contains non-finite entries")
    if np.any(H < 0):
        raise NegativeInput(f"matrix has {int(np.count_nonzero(H < 0))} negative entries")
    d, n = H.shape
    if rank < 1 or rank > min(d, n):
        raise RankTooLarge(f"rank {rank} not in [1, min({d}, {n})]")
    if max_iters < 1:
        raise ConfigError("max_iters must be >= 1")

    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(H.mean(), EPS) / rank)
    # uniform on (0, 1]
    B = (1.0 - rng.random((d, rank))) * scale
    C = (1.0 - rng.random((rank, n))) * scale

    trace = [_objective(H, B, C)]
    it = 0
    for it in range(1, max_iters + 1):
        C *= (B.T @ H) / np.maximum(B.T @ B @ C, EPS)
        B *= (H @ C.T) / np.maximum(B @ (C @ C.T), EPS)
        obj = _objective(H, B, C)
        prev = trace[-1]
        trace.append(obj)
        if prev == 0.0 or (prev - obj) / prev < rel_tol:
            break
    return FactorPair(B, C, trace[-1], trace, it)


def nnls(A, b, max_iter=None):
    """Lawson-Hanson active-set solution of ``min ||A x - b||`` s.t. ``x >= 0``.

    Returns ``(x, residual_norm)``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise DimensionMismatch(f"rhs has shape {b.shape}, basis has {m} rows")
    if max_iter is None:
        max_iter = 3 * n + 10
    tol = 10 * max(m, n) * np.finfo(float).eps * max(np.abs(A).sum(axis=0).max(initial=0.0), 1.0)

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ b
    for _ in range(max_iter):
        free = ~passive
        if not free.any() or w[free].max() <= tol:
            break
        j = int(np.argmax(np.where(free, w, -np.inf)))
        passive[j] = True
        s = _passive_lstsq(A, b, passive)
        # inner loop: step back until the passive solution is feasible
        while passive.any() and s[passive].min() <= 0:
            neg = passive & (s <= 0)
            denom = x[neg] - s[neg]
            # denom >= 0 here; 0 only for a freshly added index with s_j == 0
            alpha = np.min(np.divide(x[neg], denom, out=np.zeros_like(denom), where=denom > 0))
            x = x + alpha * (s - x)
            passive &= x > tol
            x[~passive] = 0.0
            s = _passive_lstsq(A, b, passive)
        x = s
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b))


def _passive_lstsq(A, b, passive):
    s = np.zeros(A.shape[1])
    if passive.any():
        s[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
    return s


def nnls_project(h, B):
    """Non-negative coefficients of segment ``h`` in basis ``B``."""
    h = np.asarray(h, dtype=float)
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or h.ndim != 1 or h.shape[0] != B.shape[0]:
        raise DimensionMismatch(f"segment {h.shape} incompatible with basis {B.shape}")
    x, res = nnls(B, h)
    return CoeffVector(x, res)


def nnls_project_many(H, B):
    """Project every column of ``H`` (``(d, n)``); returns ``(r, n)`` coefficients."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != B.shape[0]:
        raise DimensionMismatch(f"segments {H.shape} incompatible with basis {np.shape(B)}")
    out = np.empty((B.shape[1], H.shape[1]))
    for i in range(H.shape[1]):
        out[:, i] = nnls(B, H[:, i])[0]
    return out


class MultiplicativeNMF(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`nmf_fit`.

    Follows the scikit-learn orientation: ``X`` is ``(n_samples, n_features)``,
    i.e. the transpose of the head-motion matrix. ``transform`` projects rows
    by exact NNLS against the fitted basis.
    """

    def __init__(self, n_components=16, max_iter=500, tol=1e-6, random_state=0):
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.factors_ = nmf_fit(X.T, self.n_components, self.max_iter, self.tol, self.random_state)
        self.components_ = self.factors_.basis.T
        self.reconstruction_err_ = self.factors_.final_objective
        self.n_iter_ = self.factors_.n_iter
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).factors_.coefficients.T

    def transform(self, X):
        check_is_fitted(self, "factors_")
        X = check_array(X, dtype=float)
        return nnls_project_many(X.T, self.factors_.basis).T

    def inverse_transform(self, W):
        check_is_fitted(self, "factors_")
        return np.asarray(W) @ self.components_
