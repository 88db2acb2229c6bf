"""Uniform fit/predict adapters over the trait predictors, keyed by model name."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..analytics.baseline import PCARegression
from ..analytics.fusion import fuse_decisions
from ..exceptions import ConfigError, DataError
from ..predictors.hmm import HMMClassifier
from ..predictors.lstm import LSTMClassifier, LSTMRegressor

MODEL_NAMES = ("constant", "pca", "hmm", "lstm-kin", "lstm-au", "lstm-ff", "lstm-df")
TASKS = ("regression", "classification")


@dataclass
class ModelSpec:
    name: str
    task: str = "regression"
    params: dict = field(default_factory=dict)
    n_kinemes: int = 16

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.name!r}; choose from {', '.join(MODEL_NAMES)}")
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}")
        if self.name == "hmm" and self.task != "classification":
            raise ConfigError("the HMM model only supports classification")
        if self.name == "pca" and self.task != "regression":
            raise ConfigError("the PCA baseline only supports regression")


def _lstm(spec, mode, seed):
    cls = LSTMClassifier if spec.task == "classification" else LSTMRegressor
    params = {k: v for k, v in spec.params.items() if k in cls().get_params()}
    params.update(mode=mode, n_kinemes=spec.n_kinemes, random_state=seed)
    return cls(**params)


def _pose_matrix(chunks):
    if any(c.pose is None for c in chunks):
        raise DataError("chunks carry no pose features")
    widths = {c.pose.shape[0] for c in chunks}
    if len(widths) != 1:
        raise DataError("pose feature widths differ; chunk videos to a fixed length for the PCA baseline")
    return np.stack([c.pose for c in chunks])


class TraitModel:
    """Fits one of :data:`MODEL_NAMES` on encoded chunks.

    ``predict`` returns ``(predictions, p_high)``: labels (classification) or
    scores (regression), and the High-class probability (``None`` for
    regression).
    """

    def __init__(self, spec, seed=0):
        self.spec = spec
        self.seed = seed

    def fit(self, chunks, y, val_chunks=None, y_val=None):
        s, name = self.spec, self.spec.name
        y = np.asarray(y, dtype=float)
        val_chunks = val_chunks or None
        if name == "constant":
            self.constant_ = float(y.mean()) if s.task == "regression" else float(y.mean() > 0.5)
            self.p_high_ = float(y.mean())
        elif name == "pca":
            self.model_ = PCARegression(s.params.get("variance", 0.90)).fit(_pose_matrix(chunks), y)
        elif name == "hmm":
            p = {k: v for k, v in s.params.items() if k in HMMClassifier().get_params()}
            p.update(n_symbols=s.n_kinemes, random_state=self.seed)
            self.model_ = HMMClassifier(**p).fit(chunks, y.astype(int))
        elif name == "lstm-df":
            self.kin_ = _lstm(s, "kin", self.seed).fit(chunks, y, val_chunks, y_val)
            self.au_ = _lstm(s, "au", self.seed + 1).fit(chunks, y, val_chunks, y_val)
            ref_chunks, ref_y = (val_chunks, y_val) if val_chunks else (chunks, y)
            fr = fuse_decisions(self._score(self.kin_, ref_chunks), self._score(self.au_, ref_chunks),
                                ref_y, s.task)
            self.alpha_ = fr.alpha
            self.fusion_ = fr
        else:
            self.model_ = _lstm(s, name.split("-")[1], self.seed).fit(chunks, y, val_chunks, y_val)
        return self

    def _score(self, est, chunks):
        if self.spec.task == "classification":
            return est.predict_proba(chunks)[:, 1]
        return est.predict(chunks)

    def predict(self, chunks):
        s, name = self.spec, self.spec.name
        n = len(chunks)
        if name == "constant":
            pred = np.full(n, self.constant_)
            p_high = np.full(n, self.p_high_)
        elif name == "lstm-df":
            fused = self.alpha_ * self._score(self.kin_, chunks) + (1 - self.alpha_) * self._score(self.au_, chunks)
            pred, p_high = fused, fused
            if s.task == "classification":
                pred = (fused > 0.5).astype(float)
        elif s.task == "classification":
            p_high = self.model_.predict_proba(chunks)[:, 1]
            pred = self.model_.predict(chunks).astype(float)
        else:
            pred, p_high = self.model_.predict(chunks if name != "pca" else _pose_matrix(chunks)), None
        if s.task == "regression":
            return np.asarray(pred, dtype=float), None
        return pred.astype(int), np.asarray(p_high, dtype=float)

    def to_dict(self):
        d = {"version": 1, "spec": {"name": self.spec.name, "task": self.spec.task,
                                    "params": self.spec.params, "n_kinemes": self.spec.n_kinemes},
             "seed": self.seed}
        name = self.spec.name
        if name == "constant":
            d["constant"] = self.constant_
            d["p_high"] = self.p_high_
        elif name == "pca":
            m = self.model_
            d["pca"] = {"mean": m.mean_.tolist(), "components": m.components_.tolist(),
                        "coef": m.coef_.tolist(), "intercept": m.intercept_}
        elif name == "lstm-df":
            d["alpha"] = self.alpha_
            d["kin"] = self.kin_.to_dict()
            d["au"] = self.au_.to_dict()
        else:
            d["model"] = self.model_.to_dict()
        return d
