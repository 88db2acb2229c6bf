"""Dominant facial action units per time window."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConfigError, DataError, DimensionMismatch, TrackTooShort
from .pose import DEFAULT_FPS, _is_regular, frames_for, resample_frames

AU_CODES = (1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 17, 20, 23, 25, 26, 45)
AU_NAMES = tuple(f"AU{c:02d}" for c in AU_CODES)
N_AUS = len(AU_CODES)
TIE_RTOL = 1e-12


@dataclass(eq=False)
class AUFrameTrack:
    """Per-frame AU intensities (OpenFace ``AUxx_r`` scale, 0 to 5)."""

    video_id: str
    fps: float
    timestamps: np.ndarray
    intensities: np.ndarray  # (T, 17)
    au_names: tuple = AU_NAMES

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.intensities = np.asarray(self.intensities, dtype=float)
        if self.intensities.ndim != 2 or self.intensities.shape[1] != len(self.au_names):
            raise DimensionMismatch(
                f"{self.video_id}: intensities {self.intensities.shape} vs {len(self.au_names)} AU channels"
            )
        if self.intensities.shape[0] != self.timestamps.shape[0]:
            raise DimensionMismatch(f"{self.video_id}: timestamps and intensities differ in length")
        if np.any(self.intensities < 0):
            raise DataError(f"{self.video_id}: negative AU intensities")

    def __len__(self):
        return self.intensities.shape[0]

    def frames(self, start, stop, video_id=None):
        sl = slice(start, stop)
        return AUFrameTrack(video_id if video_id is not None else self.video_id, self.fps,
                            self.timestamps[sl], self.intensities[sl], self.au_names)

    def resample(self, fps):
        if np.isclose(fps, self.fps) and _is_regular(self.timestamps, self.fps):
            return self
        t, values = resample_frames(self.timestamps, self.intensities, fps)
        return AUFrameTrack(self.video_id, fps, t, np.maximum(values, 0.0), self.au_names)


@dataclass(eq=False)
class AUSequence:
    """Binary dominance vector per window."""

    video_id: str
    window_starts: np.ndarray
    dominance: np.ndarray  # (n_windows, n_aus) of 0/1
    window_len_s: float = 2.0
    step_s: float = 1.0
    au_names: tuple = field(default=AU_NAMES)

    def __len__(self):
        return self.dominance.shape[0]


def dominant_au_sequence(track, window_s=2.0, step_s=1.0):
    """Mark AU ``a`` dominant in a window when its peak exceeds the window's mean
    intensity taken over every AU and frame (strict inequality).
    """
    w = frames_for(window_s, track.fps)
    step = frames_for(step_s, track.fps)
    if w < 1 or step < 1:
        raise ConfigError(f"window {window_s}s / step {step_s}s too short at {track.fps} fps")
    if len(track) < w:
        raise TrackTooShort(f"{track.video_id}: {len(track)} frames < window {w}")
    # (n_windows, n_aus, w)
    win = sliding_window_view(track.intensities, w, axis=0)[::step]
    threshold = win.mean(axis=(1, 2))
    # a peak within rounding of the mean is a tie (constant windows average to c +- ulp)
    threshold = threshold + TIE_RTOL * np.abs(threshold)
    dominance = (win.max(axis=2) > threshold[:, None]).astype(np.int8)
    starts = track.timestamps[np.arange(win.shape[0]) * step]
    return AUSequence(track.video_id, starts, dominance, window_s, step_s, tuple(track.au_names))


class DominantAUTransformer(TransformerMixin, BaseEstimator):
    """Stateless transformer: list of :class:`AUFrameTrack` to :class:`AUSequence`.

    Tracks are resampled to ``fps`` first so window counts line up with the
    kineme windows of the same clip.
    """

    def __init__(self, window_s=2.0, step_s=1.0, fps=DEFAULT_FPS):
        self.window_s = window_s
        self.step_s = step_s
        self.fps = fps

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return [dominant_au_sequence(t.resample(self.fps), self.window_s, self.step_s) for t in X]
