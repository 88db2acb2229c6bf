"""Median binarization of trait scores and chunk-to-video aggregation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import DataError, EmptyScores, LengthMismatch
from .metrics import as_binary

HIGH, LOW = 1, 0


@dataclass(eq=False)
class TraitLabels:
    trait: str
    scores: np.ndarray
    labels: np.ndarray  # 1 = High, 0 = Low
    median: float

    def as_strings(self):
        return ["H" if v else "L" for v in self.labels]


def binarize_median(scores, trait="trait", median=None):
    """High iff score > median, Low otherwise (ties go Low).

    Pass ``median`` computed on the training split to label validation or
    test scores without leaking their distribution.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise EmptyScores("no scores to binarize")
    if median is None:
        if scores.size < 2:
            raise EmptyScores("need at least two scores to take a median")
        median = float(np.median(scores))
    if np.any((scores < 0) | (scores > 1)):
        raise DataError("trait scores must lie in [0, 1]")
    return TraitLabels(trait, scores, (scores > median).astype(int), float(median))


def aggregate_video(chunk_predictions, task="classification", chunk_scores=None):
    """Video-level prediction from its chunk predictions.

    Classification takes the majority label. A tie goes to the label whose
    chunks have the higher mean confidence, where ``chunk_scores`` is the
    per-chunk probability of High; a remaining tie resolves to Low.
    Regression averages the chunk scores.
    """
    preds = np.asarray(chunk_predictions)
    if preds.size == 0:
        raise DataError("no chunk predictions")
    if task == "regression":
        return float(np.mean(preds.astype(float)))
    labels = as_binary(preds)
    n_high = int(labels.sum())
    n_low = labels.size - n_high
    if n_high != n_low:
        return HIGH if n_high > n_low else LOW
    if chunk_scores is None:
        return LOW
    p = np.asarray(chunk_scores, dtype=float)
    if p.shape != labels.shape:
        raise LengthMismatch("chunk_scores and chunk_predictions differ in length")
    conf_high = p[labels == HIGH].mean()
    conf_low = (1.0 - p[labels == LOW]).mean()
    return HIGH if conf_high > conf_low else LOW
