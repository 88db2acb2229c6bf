"""Repeated k-fold cross-validation at the video level, with chunk- and
video-level reporting."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ..analytics.labels import aggregate_video, binarize_median
from ..analytics.metrics import MetricsReport, classification_metrics, regression_metrics
from ..exceptions import DataError, TooFewVideos
from .models import TraitModel


@dataclass
class RunSplit:
    run: int
    repeat: int
    fold: int
    train_ids: list
    val_ids: list
    test_ids: list


@dataclass
class CrossvalReport:
    chunk: MetricsReport
    video: MetricsReport
    splits: list = field(default_factory=list)
    details: dict | None = None  # fitted model and test predictions of a fixed-split run

    def format_table(self):
        return self.chunk.format_table() + "\n\n" + self.video.format_table()

    def to_csv(self, path=None):
        text = self.chunk.to_csv() + "\n" + self.video.to_csv()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def fold_assignments(n_videos, folds, repeats, seed):
    """``repeats`` lists of ``folds`` index arrays, each list partitioning ``range(n_videos)``."""
    out = []
    for r in range(repeats):
        perm = np.random.default_rng([seed, r]).permutation(n_videos)
        out.append([np.sort(p) for p in np.array_split(perm, folds)])
    return out


def _chunks_and_targets(videos, trait, task, median):
    chunks, y = [], []
    for v in videos:
        s = v.score(trait)
        target = s if task == "regression" else float(s > median)
        chunks.extend(v.chunks)
        y.extend([target] * len(v.chunks))
    return chunks, np.array(y)


def evaluate_run(videos, train, val, test, spec, trait, seed, details=False):
    """Fit on ``train``, validate on ``val``, score ``test`` (lists of videos).

    Returns ``(chunk_metrics, video_metrics)`` dicts, plus a dict with the
    fitted model and chunk-level test predictions when ``details`` is set.
    """
    task = spec.task
    fit_scores = np.array([v.score(trait) for v in train + val])
    median = binarize_median(fit_scores, trait).median if task == "classification" else None
    tr_c, tr_y = _chunks_and_targets(train, trait, task, median)
    va_c, va_y = _chunks_and_targets(val, trait, task, median)
    te_c, te_y = _chunks_and_targets(test, trait, task, median)
    if not tr_c or not te_c:
        raise DataError("empty training or test chunk set")
    model = TraitModel(spec, seed).fit(tr_c, tr_y, va_c or None, va_y if va_c else None)
    pred, p_high = model.predict(te_c)

    if task == "regression":
        chunk_m = regression_metrics(pred, te_y)
    else:
        chunk_m = classification_metrics(pred.astype(int), te_y.astype(int))

    vid_pred, vid_true, start = [], [], 0
    for v in test:
        n = len(v.chunks)
        sl = slice(start, start + n)
        vid_pred.append(aggregate_video(pred[sl], task, None if p_high is None else p_high[sl]))
        vid_true.append(te_y[start])
        start += n
    if task == "regression":
        video_m = regression_metrics(np.array(vid_pred), np.array(vid_true))
    else:
        video_m = classification_metrics(np.array(vid_pred, dtype=int), np.array(vid_true, dtype=int))
    if details:
        extra = {"model": model, "chunks": te_c, "pred": pred, "p_high": p_high, "target": te_y, "median": median}
        return chunk_m, video_m, extra
    return chunk_m, video_m


def _one_run(videos, split, spec, trait, seed):
    by_id = {v.video_id: v for v in videos}
    train = [by_id[i] for i in split.train_ids]
    val = [by_id[i] for i in split.val_ids]
    test = [by_id[i] for i in split.test_ids]
    # video-level split integrity
    assert not (set(split.train_ids) | set(split.val_ids)) & set(split.test_ids)
    assert not set(split.train_ids) & set(split.val_ids)
    return evaluate_run(videos, train, val, test, spec, trait, seed * 100003 + split.run)


def make_splits(videos, folds=10, repeats=5, val_fraction=0.10, seed=0):
    ids = [v.video_id for v in videos]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate video ids in corpus")
    if len(ids) < folds:
        raise TooFewVideos(f"{len(ids)} videos for {folds} folds")
    splits = []
    for r, parts in enumerate(fold_assignments(len(ids), folds, repeats, seed)):
        for f, test_idx in enumerate(parts):
            rest = np.setdiff1d(np.arange(len(ids)), test_idx)
            rng = np.random.default_rng([seed, r, f, 1])
            n_val = int(round(val_fraction * rest.size)) if val_fraction > 0 else 0
            n_val = min(max(n_val, 1 if val_fraction > 0 else 0), rest.size - 1)
            shuffled = rng.permutation(rest)
            val_idx, train_idx = np.sort(shuffled[:n_val]), np.sort(shuffled[n_val:])
            splits.append(RunSplit(
                len(splits), r, f,
                [ids[i] for i in train_idx], [ids[i] for i in val_idx], [ids[i] for i in test_idx],
            ))
    return splits


def run_crossval(videos, spec, trait, folds=10, repeats=5, val_fraction=0.10, seed=0, jobs=1):
    """``repeats`` x ``folds`` video-level cross-validation.

    Each run trains on the remaining folds minus a random ``val_fraction`` of
    their videos (used for early stopping or fusion weight search) and tests
    on the held-out fold. Results are merged in run order whatever the
    completion order.
    """
    videos = list(videos)
    splits = make_splits(videos, folds, repeats, val_fraction, seed)
    results = Parallel(n_jobs=jobs)(delayed(_one_run)(videos, s, spec, trait, seed) for s in splits)
    chunk_runs, video_runs = [], []
    for s, (cm, vm) in zip(splits, results):
        tag = {"run": s.run, "repeat": s.repeat, "fold": s.fold}
        chunk_runs.append({**tag, **cm})
        video_runs.append({**tag, **vm})
    return CrossvalReport(
        MetricsReport(spec.task, chunk_runs, "chunk"),
        MetricsReport(spec.task, video_runs, "video"),
        splits,
    )


def run_fixed_split(videos, spec, trait, val_fraction=0.10, seed=0):
    """Single run using the ``train``/``val``/``test`` split tags on each video."""
    videos = list(videos)
    train = [v for v in videos if v.split == "train"]
    val = [v for v in videos if v.split == "val"]
    test = [v for v in videos if v.split == "test"]
    if not train or not test:
        raise DataError("fixed-split evaluation needs videos tagged 'train' and 'test'")
    if not val and val_fraction > 0:
        rng = np.random.default_rng([seed, 2])
        perm = rng.permutation(len(train))
        n_val = max(1, int(round(val_fraction * len(train))))
        val = [train[i] for i in sorted(perm[:n_val])]
        train = [train[i] for i in sorted(perm[n_val:])]
    cm, vm, extra = evaluate_run(videos, train, val, test, spec, trait, seed, details=True)
    split = RunSplit(0, 0, 0, [v.video_id for v in train], [v.video_id for v in val], [v.video_id for v in test])
    return CrossvalReport(MetricsReport(spec.task, [cm], "chunk"), MetricsReport(spec.task, [vm], "video"),
                          [split], extra)
