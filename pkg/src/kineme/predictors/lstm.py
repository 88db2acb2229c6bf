"""Single-layer LSTM over kineme one-hot and/or AU dominance sequences.

Each input branch runs its own LSTM; the final hidden states are concatenated
(feature fusion when both branches are present), passed through dropout and
a dense head: two sigmoid units for classification or one linear unit for
regression. Written in plain numpy with explicit backpropagation through
time.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ConfigError, DataError, LengthMismatch, LossHeadMismatch, WidthMismatch

logger = logging.getLogger(__name__)

MODEL_VERSION = 1
HEADS = ("classification", "regression")
LOSS_FOR_HEAD = {"classification": "bce", "regression": "mae"}


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _glorot(rng, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, (fan_in, fan_out))


def _orthogonal(rng, rows, cols):
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    return q if rows >= cols else q.T


@dataclass(eq=False)
class SeqNet:
    """Parameters and architecture of the sequence network.

    ``branches`` maps branch name (``"kin"``, ``"au"``) to input width, in
    input order. Parameter keys are ``"<branch>.Wx"`` ``(D, 4H)``,
    ``"<branch>.Wh"`` ``(H, 4H)``, ``"<branch>.b"`` ``(4H,)`` with gate order
    input, forget, output, candidate, plus ``"head.W"`` and ``"head.b"``.
    """

    branches: dict
    hidden: int = 32
    head: str = "classification"
    dropout: float = 0.2
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.head not in HEADS:
            raise ConfigError(f"head must be one of {HEADS}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if not self.branches:
            raise ConfigError("at least one input branch is required")

    @classmethod
    def build(cls, branches, hidden=32, head="classification", dropout=0.2, seed=0):
        net = cls(dict(branches), hidden, head, dropout)
        rng = np.random.default_rng(seed)
        H = hidden
        for name, D in net.branches.items():
            net.params[f"{name}.Wx"] = _glorot(rng, D, 4 * H)
            net.params[f"{name}.Wh"] = _orthogonal(rng, H, 4 * H)
            b = np.zeros(4 * H)
            b[H:2 * H] = 1.0  # forget-gate bias
            net.params[f"{name}.b"] = b
        net.params["head.W"] = _glorot(rng, net.merge_width, net.n_outputs)
        net.params["head.b"] = np.zeros(net.n_outputs)
        return net

    @property
    def merge_width(self):
        return self.hidden * len(self.branches)

    @property
    def n_outputs(self):
        return 2 if self.head == "classification" else 1

    def copy(self):
        return SeqNet(dict(self.branches), self.hidden, self.head, self.dropout,
                      {k: v.copy() for k, v in self.params.items()})

    def to_dict(self):
        return {
            "version": MODEL_VERSION,
            "branches": self.branches,
            "hidden": self.hidden,
            "head": self.head,
            "dropout": self.dropout,
            "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in self.params.items()},
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != MODEL_VERSION:
            raise DataError(f"unsupported SeqNet version {d.get('version')!r}")
        params = {k: np.asarray(p["data"], dtype=float).reshape(p["shape"]) for k, p in d["params"].items()}
        return cls(dict(d["branches"]), int(d["hidden"]), d["head"], float(d["dropout"]), params)


@dataclass
class TrainConfig:
    loss: str = "bce"  # "bce" or "mae"
    epochs: int = 100
    batch_size: int = 32
    patience: int = 10
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if self.loss not in ("bce", "mae"):
            raise ConfigError(f"unknown loss {self.loss!r}")


@dataclass(eq=False)
class Batch:
    """Padded inputs per branch plus a validity mask ``(B, T)`` per branch."""

    inputs: dict
    masks: dict

    @property
    def size(self):
        return next(iter(self.inputs.values())).shape[0]

    def take(self, idx):
        return Batch({k: v[idx] for k, v in self.inputs.items()}, {k: v[idx] for k, v in self.masks.items()})


def _pad(seqs, width, name):
    lengths = [s.shape[0] for s in seqs]
    T = max(lengths)
    X = np.zeros((len(seqs), T, width))
    M = np.zeros((len(seqs), T))
    for i, s in enumerate(seqs):
        if s.ndim != 2 or s.shape[1] != width:
            raise WidthMismatch(f"{name} input {i} has shape {s.shape}, expected (T, {width})")
        if s.shape[0] == 0:
            raise DataError(f"{name} input {i} is empty")
        X[i, : s.shape[0]] = s
        M[i, : s.shape[0]] = 1.0
    return X, M


def make_batch(branches, kin=None, au=None):
    """Pad per-sample ``(T, D)`` arrays into a :class:`Batch`.

    ``kin`` and ``au`` are lists of already-encoded arrays (one-hot kinemes,
    binary AU vectors). In fusion mode each kineme/AU pair must share length.
    """
    given = {"kin": kin, "au": au}
    inputs, masks = {}, {}
    for name, width in branches.items():
        seqs = given.get(name)
        if seqs is None:
            raise DataError(f"missing input for branch {name!r}")
        inputs[name], masks[name] = _pad([np.asarray(s, dtype=float) for s in seqs], width, name)
    if len(inputs) > 1:
        sizes = {v.shape[0] for v in inputs.values()}
        if len(sizes) > 1:
            raise LengthMismatch("branches received different numbers of samples")
        ref = next(iter(masks.values()))
        for m in masks.values():
            if not np.array_equal(m, ref):
                raise LengthMismatch("kineme and AU sequences differ in length")
    return Batch(inputs, masks)


def _branch_forward(params, name, X, M):
    Wx, Wh, b = params[f"{name}.Wx"], params[f"{name}.Wh"], params[f"{name}.b"]
    B, T, _ = X.shape
    H = Wh.shape[0]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    cache = []
    for t in range(T):
        z = X[:, t] @ Wx + h @ Wh + b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        o = _sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = M[:, t, None]
        cache.append((h, c, i, f, o, g, tc, m))
        # padded steps carry the state through unchanged
        c = m * c_new + (1.0 - m) * c
        h = m * h_new + (1.0 - m) * h
    return h, cache


def _branch_backward(params, name, X, cache, dh):
    Wx, Wh = params[f"{name}.Wx"], params[f"{name}.Wh"]
    H = Wh.shape[0]
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H)
    dc = np.zeros_like(dh)
    for t in range(len(cache) - 1, -1, -1):
        h_prev, c_prev, i, f, o, g, tc, m = cache[t]
        dh_new = m * dh
        dc_new = m * dc + dh_new * o * (1.0 - tc**2)
        dz = np.concatenate(
            [
                dc_new * g * i * (1.0 - i),
                dc_new * c_prev * f * (1.0 - f),
                dh_new * tc * o * (1.0 - o),
                dc_new * i * (1.0 - g**2),
            ],
            axis=1,
        )
        dWx += X[:, t].T @ dz
        dWh += h_prev.T @ dz
        db += dz.sum(axis=0)
        dh = dz @ Wh.T + (1.0 - m) * dh
        dc = dc_new * f + (1.0 - m) * dc
    return {f"{name}.Wx": dWx, f"{name}.Wh": dWh, f"{name}.b": db}


def _forward_all(net, batch, drop_mask=None):
    finals, caches = [], {}
    for name in net.branches:
        h, caches[name] = _branch_forward(net.params, name, batch.inputs[name], batch.masks[name])
        finals.append(h)
    merged = np.concatenate(finals, axis=1)
    if drop_mask is not None:
        merged = merged * drop_mask
    logits = merged @ net.params["head.W"] + net.params["head.b"]
    return logits, merged, caches


def _outputs(net, logits):
    return _sigmoid(logits) if net.head == "classification" else logits[:, 0]


def seqnet_forward(net, kin=None, au=None):
    """Inference outputs: ``(N, 2)`` sigmoid scores or ``(N,)`` regression values."""
    batch = kin if isinstance(kin, Batch) else make_batch(net.branches, kin, au)
    logits, _, _ = _forward_all(net, batch)
    return _outputs(net, logits)


def _targets(net, y):
    y = np.asarray(y, dtype=float)
    if net.head == "classification":
        return np.column_stack([1.0 - y, y])
    return y


def loss_and_grad(net, batch, y, loss="bce", drop_mask=None):
    """Mean loss over the batch and gradients for every parameter tensor."""
    if LOSS_FOR_HEAD[net.head] != loss:
        raise LossHeadMismatch(f"loss {loss!r} does not match a {net.head} head")
    B = batch.size
    logits, merged, caches = _forward_all(net, batch, drop_mask)
    target = _targets(net, y)
    if net.head == "classification":
        p = _sigmoid(logits)
        # BCE summed over the two outputs, from logits for stability
        value = np.sum(np.maximum(logits, 0) - logits * target + np.log1p(np.exp(-np.abs(logits)))) / B
        dlogits = (p - target) / B
    else:
        diff = logits[:, 0] - target
        value = np.mean(np.abs(diff))
        dlogits = (np.sign(diff) / B)[:, None]
    grads = {
        "head.W": merged.T @ dlogits,
        "head.b": dlogits.sum(axis=0),
    }
    dmerged = dlogits @ net.params["head.W"].T
    if drop_mask is not None:
        dmerged = dmerged * drop_mask
    H = net.hidden
    for k, name in enumerate(net.branches):
        grads.update(_branch_backward(net.params, name, batch.inputs[name], caches[name],
                                      dmerged[:, k * H:(k + 1) * H]))
    return float(value), grads


def batch_loss(net, batch, y, loss):
    out = seqnet_forward(net, batch)
    target = _targets(net, y)
    if loss == "bce":
        p = np.clip(out, 1e-12, 1 - 1e-12)
        return float(-np.sum(target * np.log(p) + (1 - target) * np.log(1 - p)) / batch.size)
    return float(np.mean(np.abs(out - target)))


class Adam:
    def __init__(self, params, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        a = self.lr * np.sqrt(1 - self.beta2**self.t) / (1 - self.beta1**self.t)
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= a * self.m[k] / (np.sqrt(self.v[k]) + self.eps)


def seqnet_train(net, batch, y, cfg, val_batch=None, y_val=None):
    """Mini-batch training with Adam and early stopping on validation loss.

    Returns the trained (best-validation) network and a list of per-epoch
    ``{"epoch", "train_loss", "val_loss"}`` records. ``net`` is not modified.
    """
    if LOSS_FOR_HEAD[net.head] != cfg.loss:
        raise LossHeadMismatch(f"loss {cfg.loss!r} does not match a {net.head} head")
    y = np.asarray(y, dtype=float)
    _check_targets(net.head, y)
    if y.shape[0] != batch.size:
        raise LengthMismatch(f"{batch.size} samples but {y.shape[0]} targets")
    net = net.copy()
    rng = np.random.default_rng(cfg.seed)
    opt = Adam(net.params, cfg.learning_rate)
    keep = 1.0 - net.dropout
    trace = []
    best, best_loss, wait = None, np.inf, 0
    n = batch.size
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s:s + cfg.batch_size]
            drop = None
            if net.dropout > 0:
                drop = (rng.random((idx.shape[0], net.merge_width)) < keep) / keep
            value, grads = loss_and_grad(net, batch.take(idx), y[idx], cfg.loss, drop)
            opt.step(net.params, grads)
            total += value * idx.shape[0]
        rec = {"epoch": epoch, "train_loss": total / n, "val_loss": None}
        if val_batch is not None:
            vl = batch_loss(net, val_batch, y_val, cfg.loss)
            rec["val_loss"] = vl
            if vl < best_loss:
                best, best_loss, wait = net.copy(), vl, 0
            else:
                wait += 1
        trace.append(rec)
        if val_batch is not None and wait >= cfg.patience:
            logger.debug("early stop at epoch %d (best val %.5f)", epoch, best_loss)
            break
    return (best if best is not None else net), trace


def _check_targets(head, y):
    if head == "classification":
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise DataError("classification targets must be 0 or 1")
    elif np.any((y < 0) | (y > 1)) or not np.all(np.isfinite(y)):
        raise DataError("regression targets must lie in [0, 1]")


BRANCHES = {"kin": ("kin",), "au": ("au",), "ff": ("kin", "au")}


def _sample_parts(x):
    """Split one sample into its ``(kin, au)`` parts."""
    if isinstance(x, tuple):
        return x
    kin = getattr(x, "kinemes", None)
    au = getattr(x, "aus", None)
    if kin is not None or au is not None:
        return kin, au
    if hasattr(x, "symbols"):
        return x, None
    if hasattr(x, "dominance"):
        return None, x
    arr = np.asarray(x)
    return (arr, None) if arr.ndim == 1 else (None, arr)


def _encode_kin(k, n_kinemes):
    s = np.asarray(getattr(k, "symbols", k))
    if s.ndim == 2:
        return s.astype(float)
    if s.min() < 1 or s.max() > n_kinemes:
        raise DataError(f"kineme symbols outside [1, {n_kinemes}]")
    out = np.zeros((s.shape[0], n_kinemes))
    out[np.arange(s.shape[0]), s - 1] = 1.0
    return out


def _encode_au(a):
    return np.asarray(getattr(a, "dominance", a), dtype=float)


class _SeqNetEstimator(BaseEstimator):
    _head = None

    def __init__(self, mode="kin", n_kinemes=16, n_aus=17, hidden=32, dropout=0.2, learning_rate=0.01,
                 epochs=100, batch_size=32, patience=10, validation_fraction=0.1, random_state=0):
        self.mode = mode
        self.n_kinemes = n_kinemes
        self.n_aus = n_aus
        self.hidden = hidden
        self.dropout = dropout
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _branches(self):
        if self.mode not in BRANCHES:
            raise ConfigError(f"mode must be one of {sorted(BRANCHES)}")
        widths = {"kin": self.n_kinemes, "au": self.n_aus}
        return {b: widths[b] for b in BRANCHES[self.mode]}

    def _batch(self, X, branches):
        kin, au = [], []
        for x in X:
            k, a = _sample_parts(x)
            if "kin" in branches:
                if k is None:
                    raise DataError("sample lacks a kineme sequence")
                kin.append(_encode_kin(k, self.n_kinemes))
            if "au" in branches:
                if a is None:
                    raise DataError("sample lacks an AU sequence")
                au.append(_encode_au(a))
        return make_batch(branches, kin or None, au or None)

    def fit(self, X, y, X_val=None, y_val=None):
        X = list(X)
        y = np.asarray(y, dtype=float)
        branches = self._branches()
        if X_val is None and self.validation_fraction > 0 and len(X) >= 10:
            rng = np.random.default_rng(self.random_state + 7919)
            perm = rng.permutation(len(X))
            n_val = max(1, int(round(self.validation_fraction * len(X))))
            vi, ti = np.sort(perm[:n_val]), np.sort(perm[n_val:])
            X_val, y_val = [X[i] for i in vi], y[vi]
            X, y = [X[i] for i in ti], y[ti]
        net = SeqNet.build(branches, self.hidden, self._head, self.dropout, self.random_state)
        cfg = TrainConfig(LOSS_FOR_HEAD[self._head], self.epochs, self.batch_size, self.patience,
                          self.learning_rate, self.random_state)
        val = self._batch(X_val, branches) if X_val is not None else None
        yv = np.asarray(y_val, dtype=float) if y_val is not None else None
        self.net_, self.loss_trace_ = seqnet_train(net, self._batch(X, branches), y, cfg, val, yv)
        return self

    def _raw(self, X):
        check_is_fitted(self, "net_")
        return seqnet_forward(self.net_, self._batch(list(X), self.net_.branches))

    def to_dict(self):
        check_is_fitted(self, "net_")
        return {"version": MODEL_VERSION, "kind": f"lstm-{self._head}", "params": self.get_params(),
                "net": self.net_.to_dict()}

    @classmethod
    def from_dict(cls, d):
        est = cls(**d["params"])
        est.net_ = SeqNet.from_dict(d["net"])
        est.loss_trace_ = []
        if est._head == "classification":
            est.classes_ = np.array([0, 1])
        return est

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)


class LSTMClassifier(ClassifierMixin, _SeqNetEstimator):
    """Binary trait classifier; output unit 1 scores the High class."""

    _head = "classification"

    def fit(self, X, y, X_val=None, y_val=None):
        self.classes_ = np.array([0, 1])
        return super().fit(X, y, X_val, y_val)

    def predict_proba(self, X):
        out = self._raw(X)
        p = out[:, 1] / np.maximum(out.sum(axis=1), 1e-300)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        out = self._raw(X)
        return (out[:, 1] > out[:, 0]).astype(int)


class LSTMRegressor(RegressorMixin, _SeqNetEstimator):
    """Continuous trait score regressor trained with mean absolute error."""

    _head = "regression"

    def predict(self, X):
        return self._raw(X)
