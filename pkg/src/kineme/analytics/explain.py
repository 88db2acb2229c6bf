"""Frequent kinemes and dominant AUs among the highest and lowest rated videos."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..action_units import AU_CODES
from ..exceptions import TooFewVideos

TOP_KINEMES = 4
TOP_AUS = 5


@dataclass(eq=False)
class ExplainRow:
    trait: str
    level: str  # "H" or "L"
    kinemes: list  # [(symbol, count)], most frequent first
    aus: list  # [(au_code, count)]
    video_ids: list
    kineme_counts: np.ndarray  # full histogram over symbols 1..K
    au_counts: np.ndarray  # windows in which each AU was dominant

    @property
    def n_windows(self):
        return int(self.kineme_counts.sum())


@dataclass
class ExplainReport:
    rows: list = field(default_factory=list)

    def to_frame(self):
        return pd.DataFrame([
            {
                "trait": r.trait,
                "level": r.level,
                "n_videos": len(r.video_ids),
                "n_windows": r.n_windows,
                "kinemes": " ".join(str(s) for s, _ in r.kinemes),
                "kineme_counts": " ".join(str(c) for _, c in r.kinemes),
                "aus": " ".join(str(a) for a, _ in r.aus),
                "au_counts": " ".join(str(c) for _, c in r.aus),
            }
            for r in self.rows
        ])

    def to_csv(self, path=None):
        buf = io.StringIO()
        self.to_frame().to_csv(buf, index=False)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(buf.getvalue())
        return buf.getvalue()

    def format_table(self):
        """Trait | Dominant Kin | Dominant AUs, one line per (trait, level)."""
        lines = [f"{'Trait':<12}| {'Dominant Kin':<16}| Dominant AUs"]
        for r in self.rows:
            kin = ", ".join(str(s) for s, _ in r.kinemes)
            au = ", ".join(str(a) for a, _ in r.aus)
            lines.append(f"{r.trait + ' (' + r.level + ')':<12}| {kin:<16}| {au}")
        return "\n".join(lines)


def _ranked(counts, labels, top):
    # stable sort keeps lower symbol index first among equal counts
    order = np.argsort(-counts, kind="stable")[:top]
    return [(int(labels[i]), int(counts[i])) for i in order]


def _select_row(videos, trait, level, n_kinemes, au_codes):
    kin_counts = np.zeros(n_kinemes, dtype=int)
    au_counts = np.zeros(len(au_codes), dtype=int)
    for v in videos:
        kin_counts += np.bincount(np.asarray(v.kinemes) - 1, minlength=n_kinemes)[:n_kinemes]
        aus = np.asarray(v.aus)
        if aus.size:
            au_counts += aus.sum(axis=0).astype(int)
    return ExplainRow(
        trait, level,
        _ranked(kin_counts, np.arange(1, n_kinemes + 1), TOP_KINEMES),
        _ranked(au_counts, np.asarray(au_codes), TOP_AUS),
        [v.video_id for v in videos],
        kin_counts, au_counts,
    )


def percentile_explain(videos, trait, percentile=10.0, n_kinemes=16, au_codes=AU_CODES):
    """High/Low explanation rows for one trait.

    The High set holds videos scoring at or above the ``1 - p/100`` quantile,
    the Low set those at or below the ``p/100`` quantile. Within each set every
    window contributes one kineme occurrence and one count per dominant AU.

    Parameters
    ----------
    videos : list of EncodedVideo
    trait : str
    percentile : float
    n_kinemes : int
        Kineme vocabulary size; rows list ``min(4, n_kinemes)`` kinemes.

    Returns
    -------
    ExplainReport
        Two rows, High first.
    """
    videos = list(videos)
    if len(videos) < 10:
        raise TooFewVideos(f"{len(videos)} videos; need at least 10")
    scores = np.array([v.score(trait) for v in videos])
    hi = np.quantile(scores, 1.0 - percentile / 100.0)
    lo = np.quantile(scores, percentile / 100.0)
    top = [v for v, s in zip(videos, scores) if s >= hi]
    bottom = [v for v, s in zip(videos, scores) if s <= lo]
    return ExplainReport([
        _select_row(top, trait, "H", n_kinemes, au_codes),
        _select_row(bottom, trait, "L", n_kinemes, au_codes),
    ])
