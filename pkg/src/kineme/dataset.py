"""Encoded corpus records shared by the analytics and evaluation code."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class EncodedChunk:
    """One thin slice of a video after encoding.

    ``kinemes`` holds 1-based kineme symbols per window, ``aus`` the binary
    AU dominance matrix ``(n_windows, 17)`` and ``pose`` the flattened
    pitch/yaw/roll samples of the chunk (for the PCA baseline).
    """

    video_id: str
    index: int
    kinemes: np.ndarray
    aus: np.ndarray
    pose: np.ndarray | None = None

    def __post_init__(self):
        self.kinemes = np.asarray(self.kinemes, dtype=int)
        self.aus = np.asarray(self.aus, dtype=np.int8)
        if self.aus.ndim != 2:
            self.aus = self.aus.reshape(-1, 17)


@dataclass(eq=False)
class EncodedVideo:
    video_id: str
    scores: dict
    chunks: list = field(default_factory=list)
    split: str | None = None

    @property
    def kinemes(self):
        return np.concatenate([c.kinemes for c in self.chunks]) if self.chunks else np.zeros(0, int)

    @property
    def aus(self):
        return np.concatenate([c.aus for c in self.chunks]) if self.chunks else np.zeros((0, 17), np.int8)

    def score(self, trait):
        return float(self.scores[trait])
