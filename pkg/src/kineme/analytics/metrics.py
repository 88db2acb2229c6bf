"""Regression and classification metrics, and their aggregation over runs."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..exceptions import DataError, LengthMismatch

REGRESSION_METRICS = ("acc_reg", "pcc")
CLASSIFICATION_METRICS = ("acc_cls", "f1")
_LABELS = {"H": 1, "L": 0, "High": 1, "Low": 0, 1: 1, 0: 0, True: 1, False: 0}


def as_binary(labels):
    """0/1 int array from 0/1, bool or ``"H"``/``"L"`` labels."""
    out = []
    for v in np.asarray(labels, dtype=object).ravel():
        key = v.item() if hasattr(v, "item") else v
        if key not in _LABELS:
            raise DataError(f"unrecognised class label {v!r}")
        out.append(_LABELS[key])
    return np.array(out, dtype=int)


def pearson(x, y):
    """Pearson correlation; ``(0.0, True)`` when either input has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"{x.shape} vs {y.shape}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.dot(dx, dx))
    sy = np.sqrt(np.dot(dy, dy))
    if sx == 0 or sy == 0:
        return 0.0, True
    r = float(np.dot(dx, dy) / (sx * sy))
    return min(1.0, max(-1.0, r)), False


def f1_score(pred, truth, positive=1):
    pred = np.asarray(pred) == positive
    truth = np.asarray(truth) == positive
    tp = np.sum(pred & truth)
    denom = 2 * tp + np.sum(pred & ~truth) + np.sum(~pred & truth)
    return float(2 * tp / denom) if denom else 0.0


def macro_f1(pred, truth):
    return 0.5 * (f1_score(pred, truth, 1) + f1_score(pred, truth, 0))


def regression_metrics(pred, truth):
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape[0]} predictions vs {truth.shape[0]} targets")
    r, degenerate = pearson(pred, truth)
    return {"acc_reg": float(1.0 - np.mean(np.abs(pred - truth))), "pcc": r, "pcc_degenerate": degenerate}


def classification_metrics(pred, truth, macro=False):
    pred = as_binary(pred)
    truth = as_binary(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape[0]} predictions vs {truth.shape[0]} targets")
    f1 = macro_f1(pred, truth) if macro else f1_score(pred, truth)
    return {"acc_cls": float(np.mean(pred == truth)), "f1": f1}


@dataclass
class MetricsReport:
    """Per-run metric values with mean and standard deviation summaries.

    ``runs`` is a list of dicts; each may carry ``acc_reg``/``pcc`` (regression)
    or ``acc_cls``/``f1`` (classification) plus bookkeeping keys.
    """

    task: str
    runs: list = field(default_factory=list)
    level: str = "chunk"

    @property
    def metric_names(self):
        return REGRESSION_METRICS if self.task == "regression" else CLASSIFICATION_METRICS

    @property
    def n_runs(self):
        return len(self.runs)

    def values(self, metric):
        return np.array([r[metric] for r in self.runs], dtype=float)

    def mean(self, metric):
        return float(np.mean(self.values(metric)))

    def std(self, metric):
        return float(np.std(self.values(metric)))

    def _maybe_mean(self, metric):
        return self.mean(metric) if self.runs and metric in self.runs[0] else float("nan")

    @property
    def acc_reg(self):
        return self._maybe_mean("acc_reg")

    @property
    def pcc(self):
        return self._maybe_mean("pcc")

    @property
    def acc_cls(self):
        return self._maybe_mean("acc_cls")

    @property
    def f1(self):
        return self._maybe_mean("f1")

    def summary(self):
        return {m: (self.mean(m), self.std(m)) for m in self.metric_names}

    def to_frame(self):
        return pd.DataFrame(self.runs)

    def summary_frame(self):
        rows = [{"level": self.level, "metric": m, "mean": mu, "std": sd, "n_runs": self.n_runs}
                for m, (mu, sd) in self.summary().items()]
        return pd.DataFrame(rows)

    def format_table(self):
        head = "  ".join(f"{m:>16}" for m in self.metric_names)
        vals = "  ".join(f"{mu:>7.3f} ± {sd:<6.3f}" for mu, sd in self.summary().values())
        return f"{self.level} ({self.n_runs} runs)\n{head}\n{vals}"

    def to_csv(self, path=None):
        buf = io.StringIO()
        self.to_frame().to_csv(buf, index=False)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def eval_metrics(predictions, ground_truth, task="regression", macro=False):
    """Single-run :class:`MetricsReport`.

    Regression: ``acc_reg = 1 - MAE`` and Pearson ``pcc``. Classification:
    accuracy and F1 with High (1) as the positive class.
    """
    if task == "regression":
        run = regression_metrics(predictions, ground_truth)
    elif task == "classification":
        run = classification_metrics(predictions, ground_truth, macro)
    else:
        raise DataError(f"unknown task {task!r}")
    return MetricsReport(task, [run])
