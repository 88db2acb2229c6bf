"""Gaussian mixture over NMF coefficient vectors, fitted by EM."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError, DegenerateComponent, DimensionMismatch, TooFewPoints

logger = logging.getLogger(__name__)

VAR_FLOOR = 1e-6
LOG_2PI = np.log(2.0 * np.pi)


@dataclass(eq=False)
class GaussianMixture:
    """Fitted mixture parameters.

    ``variances`` is ``(k, r)`` for diagonal components and ``(k, r, r)`` for
    full covariances. ``log_likelihood_trace`` holds the mean per-point
    log-likelihood evaluated before each M-step, plus the final value.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    covariance_type: str = "diag"
    log_likelihood_trace: list = field(default_factory=list)
    n_iter: int = 0
    reseeded: bool = False

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def dim(self):
        return self.means.shape[1]

    def component_log_density(self, X):
        """``(n, k)`` matrix of ``log N(x_i | mean_j, cov_j)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"points have dim {X.shape[1]}, mixture has {self.dim}")
        if self.covariance_type == "diag":
            var = self.variances
            diff2 = (X[:, None, :] - self.means[None, :, :]) ** 2
            maha = np.sum(diff2 / var[None], axis=2)
            logdet = np.sum(np.log(var), axis=1)
        else:
            chol = np.linalg.cholesky(self.variances)
            diff = X[:, None, :] - self.means[None, :, :]
            maha = np.empty((X.shape[0], self.k))
            for j in range(self.k):
                z = np.linalg.solve(chol[j], diff[:, j, :].T)
                maha[:, j] = np.sum(z * z, axis=0)
            logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=1, axis2=2)), axis=1)
        return -0.5 * (self.dim * LOG_2PI + logdet[None, :] + maha)

    def log_joint(self, X):
        with np.errstate(divide="ignore"):
            return self.component_log_density(X) + np.log(self.weights)[None, :]

    def posterior(self, X):
        """Responsibilities ``(n, k)``; rows sum to one."""
        lj = self.log_joint(X)
        return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))

    def mean_log_likelihood(self, X):
        return float(np.mean(logsumexp(self.log_joint(X), axis=1)))


def _kmeanspp(X, k, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def _box_init(X, k, rng):
    lo, hi = X.min(axis=0), X.max(axis=0)
    return lo + rng.random((k, X.shape[1])) * (hi - lo)


def _m_step(X, resp, covariance_type, var_floor):
    nk = resp.sum(axis=0)
    weights = nk / nk.sum()
    means = (resp.T @ X) / nk[:, None]
    if covariance_type == "diag":
        # per-dimension MLE clipped at the floor is the constrained maximizer
        var = (resp.T @ (X * X)) / nk[:, None] - means**2
        var = np.maximum(var, var_floor)
    else:
        r = X.shape[1]
        var = np.empty((len(nk), r, r))
        for j in range(len(nk)):
            diff = X - means[j]
            var[j] = (resp[:, j, None] * diff).T @ diff / nk[j] + var_floor * np.eye(r)
    return weights, means, var


def gmm_fit(points, k=16, max_iters=200, rel_tol=1e-8, seed=0, covariance_type="diag",
            init="kmeans++", var_floor=VAR_FLOOR):
    """Fit a ``k``-component Gaussian mixture by expectation-maximization.

    Parameters
    ----------
    points : array-like of shape (n, r)
        One coefficient vector per row (the columns of ``C``, transposed).
    k : int
    max_iters : int
    rel_tol : float
        Stop when the mean log-likelihood improves by less than
        ``rel_tol * max(1, |ll|)``.
    seed : int
    covariance_type : {"diag", "full"}
    init : {"kmeans++", "box"}
        ``"box"`` draws initial means uniformly inside the data bounding box,
        which does not depend on point order.

    Returns
    -------
    GaussianMixture
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, r = X.shape
    if k < 1:
        raise ConfigError("k must be >= 1")
    if n < k:
        raise TooFewPoints(f"{n} points for {k} components")
    if covariance_type not in ("diag", "full"):
        raise ConfigError(f"unknown covariance_type {covariance_type!r}")

    rng = np.random.default_rng(seed)
    if init == "kmeans++":
        means = _kmeanspp(X, k, rng)
    elif init == "box":
        means = _box_init(X, k, rng)
    else:
        raise ConfigError(f"unknown init {init!r}")
    base_var = np.maximum(X.var(axis=0), var_floor)
    if covariance_type == "diag":
        variances = np.tile(base_var, (k, 1))
    else:
        variances = np.tile(np.diag(base_var), (k, 1, 1))
    model = GaussianMixture(np.full(k, 1.0 / k), means, variances, covariance_type)

    reseeded = False
    trace = []
    it = 0
    while it < max_iters:
        it += 1
        lj = model.log_joint(X)
        norm = logsumexp(lj, axis=1, keepdims=True)
        ll = float(np.mean(norm))
        resp = np.exp(lj - norm)
        nk = resp.sum(axis=0)
        dead = nk <= 10 * np.finfo(float).eps * n
        if dead.any():
            if reseeded:
                raise DegenerateComponent(f"component(s) {np.flatnonzero(dead).tolist()} collapsed twice")
            # move dead components onto the worst-explained points and restart
            logger.warning("re-seeding %d collapsed mixture component(s)", int(dead.sum()))
            worst = np.argsort(norm[:, 0])[: int(dead.sum())]
            model.means[dead] = X[worst]
            model.variances[dead] = variances[0]
            model.weights = np.full(k, 1.0 / k)
            reseeded = True
            trace = []
            continue
        if trace:
            prev = trace[-1]
            if ll - prev < rel_tol * max(1.0, abs(prev)):
                trace.append(ll)
                break
        trace.append(ll)
        model.weights, model.means, model.variances = _m_step(X, resp, covariance_type, var_floor)
    else:
        trace.append(model.mean_log_likelihood(X))
    model.log_likelihood_trace = trace
    model.n_iter = it
    model.reseeded = reseeded
    return model


def gmm_posterior(model, c):
    """Responsibility vector of length ``k`` for one coefficient vector."""
    c = np.asarray(getattr(c, "values", c), dtype=float)
    if c.ndim != 1 or c.shape[0] != model.dim:
        raise DimensionMismatch(f"coefficient vector {c.shape} vs mixture dim {model.dim}")
    return model.posterior(c[None, :])[0]


def cluster_centroids(model):
    """``(r, k)`` matrix whose column ``j`` is the mean of component ``j``."""
    return model.means.T.copy()


def reorder_components(model, order):
    """Return a copy of ``model`` with components permuted to ``order``."""
    order = np.asarray(order)
    return GaussianMixture(
        model.weights[order].copy(),
        model.means[order].copy(),
        model.variances[order].copy(),
        model.covariance_type,
        list(model.log_likelihood_trace),
        model.n_iter,
        model.reseeded,
    )


class GaussianMixtureEM(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`gmm_fit`; ``predict`` is the MAP component."""

    def __init__(self, n_components=16, covariance_type="diag", max_iter=200, tol=1e-8,
                 init="kmeans++", random_state=0):
        self.n_components = n_components
        self.covariance_type = covariance_type
        self.max_iter = max_iter
        self.tol = tol
        self.init = init
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.model_ = gmm_fit(X, self.n_components, self.max_iter, self.tol, self.random_state,
                              self.covariance_type, self.init)
        self.labels_ = self.predict(X)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        return self.model_.posterior(check_array(X, dtype=float))

    def predict(self, X):
        # argmax takes the lowest index on ties
        return np.argmax(self.predict_proba(X), axis=1)

    def score(self, X, y=None):
        check_is_fitted(self, "model_")
        return self.model_.mean_log_likelihood(check_array(X, dtype=float))
