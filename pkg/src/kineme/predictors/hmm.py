"""Discrete-emission hidden Markov models over kineme symbols."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ConfigError, DataError, EmptyCorpus, SymbolOutOfRange

MODEL_VERSION = 1


@dataclass(eq=False)
class DiscreteHMM:
    startprob: np.ndarray  # (n,)
    transmat: np.ndarray  # (n, n), row-stochastic
    emissionprob: np.ndarray  # (n, K), row-stochastic
    loglik_trace: list = field(default_factory=list)

    @property
    def n_states(self):
        return self.startprob.shape[0]

    @property
    def n_symbols(self):
        return self.emissionprob.shape[1]

    def smoothed(self, eps):
        """Copy with additive smoothing on the emission rows."""
        if eps <= 0:
            return self
        E = (self.emissionprob + eps) / (1.0 + self.n_symbols * eps)
        return DiscreteHMM(self.startprob.copy(), self.transmat.copy(), E, list(self.loglik_trace))

    def to_dict(self):
        return {
            "startprob": self.startprob.tolist(),
            "transmat": self.transmat.tolist(),
            "emissionprob": self.emissionprob.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(*(np.asarray(d[k], dtype=float) for k in ("startprob", "transmat", "emissionprob")))


def _as_symbols(seq, n_symbols=None):
    """0-based int array from a KinemeSequence, an encoded chunk or 1-based symbols."""
    s = getattr(seq, "symbols", None)
    s = np.asarray(getattr(seq, "kinemes", seq) if s is None else s)
    if s.ndim != 1 or s.shape[0] == 0:
        raise DataError("sequence must be a non-empty 1-D array of symbols")
    if not np.issubdtype(s.dtype, np.integer):
        if not np.all(np.mod(s, 1) == 0):
            raise SymbolOutOfRange("non-integer symbols")
        s = s.astype(int)
    if s.min() < 1 or (n_symbols is not None and s.max() > n_symbols):
        raise SymbolOutOfRange(f"symbols must lie in [1, {n_symbols}], got [{s.min()}, {s.max()}]")
    return s - 1


def _forward(model, obs):
    """Scaled forward pass; returns ``(alpha_hat, scales)``."""
    T, n = obs.shape[0], model.n_states
    alpha = np.zeros((T, n))
    c = np.zeros(T)
    a = model.startprob * model.emissionprob[:, obs[0]]
    for t in range(T):
        if t:
            a = (alpha[t - 1] @ model.transmat) * model.emissionprob[:, obs[t]]
        c[t] = a.sum()
        if c[t] <= 0:
            return alpha, c
        alpha[t] = a / c[t]
    return alpha, c


def _loglik_from_scales(c):
    if np.any(c <= 0):
        return float("-inf")
    return float(np.sum(np.log(c)))


def _backward(model, obs, c):
    T, n = obs.shape[0], model.n_states
    beta = np.ones((T, n))
    for t in range(T - 2, -1, -1):
        beta[t] = model.transmat @ (model.emissionprob[:, obs[t + 1]] * beta[t + 1]) / c[t + 1]
    return beta


def hmm_loglik(model, seq):
    """``log P(seq | model)`` by the scaled forward algorithm; ``-inf`` if impossible."""
    obs = _as_symbols(seq, model.n_symbols)
    _, c = _forward(model, obs)
    return _loglik_from_scales(c)


def _random_stochastic(rng, shape):
    m = 1.0 - rng.random(shape)
    return m / m.sum(axis=-1, keepdims=True)


def hmm_fit(sequences, n_states=4, n_symbols=None, max_iters=100, rel_tol=1e-6, seed=0, smoothing=0.0):
    """Baum-Welch estimation over a corpus of symbol sequences.

    Parameters
    ----------
    sequences : list of KinemeSequence or 1-based int arrays
    n_states : int
    n_symbols : int, optional
        Alphabet size ``K``; inferred from the largest symbol when omitted.
    max_iters, rel_tol : stopping rule on the corpus log-likelihood
    seed : int
    smoothing : float
        Additive emission smoothing applied once after fitting. Zero keeps the
        plain maximum-likelihood estimate.

    Returns
    -------
    DiscreteHMM
        ``loglik_trace`` records the corpus log-likelihood before each update
        and after the last one.
    """
    sequences = list(sequences)
    if not sequences:
        raise EmptyCorpus("no sequences to fit")
    if n_states < 1:
        raise ConfigError("n_states must be >= 1")
    obs_list = [_as_symbols(s, n_symbols) for s in sequences]
    if n_symbols is None:
        n_symbols = int(max(o.max() for o in obs_list)) + 1

    rng = np.random.default_rng(seed)
    model = DiscreteHMM(
        _random_stochastic(rng, n_states),
        _random_stochastic(rng, (n_states, n_states)),
        _random_stochastic(rng, (n_states, n_symbols)),
    )
    trace = []
    for it in range(max_iters + 1):
        start_acc = np.zeros(n_states)
        trans_acc = np.zeros((n_states, n_states))
        emit_acc = np.zeros((n_states, n_symbols))
        total = 0.0
        for obs in obs_list:
            alpha, c = _forward(model, obs)
            ll = _loglik_from_scales(c)
            if not np.isfinite(ll):
                raise DataError("sequence has zero probability under the current model")
            total += ll
            beta = _backward(model, obs, c)
            gamma = alpha * beta
            start_acc += gamma[0]
            if obs.shape[0] > 1:
                # xi summed over t: alpha_t(i) A(i,j) E(j, o_{t+1}) beta_{t+1}(j) / c_{t+1}
                w = model.emissionprob[:, obs[1:]].T * beta[1:] / c[1:, None]
                trans_acc += model.transmat * (alpha[:-1].T @ w)
            np.add.at(emit_acc.T, obs, gamma)
        converged = bool(trace) and (total - trace[-1]) < rel_tol * abs(trace[-1])
        trace.append(total)
        if converged or it == max_iters:
            break
        model.startprob = start_acc / start_acc.sum()
        model.transmat = _normalize_rows(trans_acc, model.transmat)
        model.emissionprob = _normalize_rows(emit_acc, model.emissionprob)
    model.loglik_trace = trace
    return model.smoothed(smoothing)


def _normalize_rows(acc, previous):
    s = acc.sum(axis=1, keepdims=True)
    # states with no expected visits keep their previous row
    return np.where(s > 0, acc / np.where(s > 0, s, 1.0), previous)


def hmm_classify(models, seq):
    """Label (0 or 1) whose model gives ``seq`` the higher likelihood; ties go to 0."""
    neg, pos = models
    if neg.n_symbols != pos.n_symbols:
        raise ConfigError("class models were trained on different alphabets")
    return int(hmm_loglik(pos, seq) > hmm_loglik(neg, seq))


class HMMClassifier(ClassifierMixin, BaseEstimator):
    """One generative HMM per class; predicts the class of higher likelihood.

    ``X`` is a list of kineme sequences; ``y`` holds binary labels (1 = High).
    """

    def __init__(self, n_states=4, n_symbols=16, max_iter=100, tol=1e-6, emission_smoothing=1e-3,
                 random_state=0):
        self.n_states = n_states
        self.n_symbols = n_symbols
        self.max_iter = max_iter
        self.tol = tol
        self.emission_smoothing = emission_smoothing
        self.random_state = random_state

    def fit(self, X, y):
        X = list(X)
        y = np.asarray(y).astype(int)
        if len(X) != y.shape[0]:
            raise DataError(f"{len(X)} sequences but {y.shape[0]} labels")
        self.classes_ = np.array([0, 1])
        self.models_ = []
        for label in (0, 1):
            seqs = [s for s, lab in zip(X, y) if lab == label]
            if not seqs:
                raise EmptyCorpus(f"no training sequences for class {label}")
            self.models_.append(
                hmm_fit(seqs, self.n_states, self.n_symbols, self.max_iter, self.tol,
                        self.random_state + label, self.emission_smoothing)
            )
        return self

    def decision_function(self, X):
        """``log P(x | High) - log P(x | Low)`` per sequence."""
        check_is_fitted(self, "models_")
        neg, pos = self.models_
        return np.array([hmm_loglik(pos, s) - hmm_loglik(neg, s) for s in X])

    def predict_proba(self, X):
        d = self.decision_function(X)
        with np.errstate(over="ignore"):
            p = 1.0 / (1.0 + np.exp(-d))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self):
        check_is_fitted(self, "models_")
        return {
            "version": MODEL_VERSION,
            "kind": "hmm",
            "params": self.get_params(),
            "models": [m.to_dict() for m in self.models_],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != MODEL_VERSION or d.get("kind") != "hmm":
            raise DataError("not an HMM checkpoint of a supported version")
        est = cls(**d["params"])
        est.classes_ = np.array([0, 1])
        est.models_ = [DiscreteHMM.from_dict(m) for m in d["models"]]
        return est

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
