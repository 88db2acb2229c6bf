"""Head-pose streams and the windowing that turns them into a non-negative
characterization matrix.

Angles are radians throughout. A segment vector stacks the pitch, yaw and
roll values of one window, in that order, giving dimension ``3 * ell``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import (
    ConfigError,
    DataError,
    DimensionMismatch,
    EmptyInput,
    InvalidOverlap,
    MixedSegmentLength,
    SeriesTooShort,
)

logger = logging.getLogger(__name__)

CHANNELS = ("pitch", "yaw", "roll")
DEFAULT_FPS = 30.0


def frames_for(seconds, fps):
    """Nearest whole number of frames covering ``seconds`` at ``fps``."""
    return int(np.floor(seconds * fps + 0.5))


@dataclass(eq=False)
class HeadPoseSeries:
    """Per-frame head rotation for one video (or one chunk of it)."""

    video_id: str
    fps: float
    timestamps: np.ndarray
    pitch: np.ndarray
    yaw: np.ndarray
    roll: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.pitch = np.asarray(self.pitch, dtype=float)
        self.yaw = np.asarray(self.yaw, dtype=float)
        self.roll = np.asarray(self.roll, dtype=float)
        if not np.isfinite(self.fps) or self.fps <= 0:
            raise DataError(f"fps must be positive, got {self.fps}")
        n = self.pitch.shape
        if len(n) != 1 or n[0] < 1:
            raise DataError("pose channels must be non-empty 1-D arrays")
        if self.yaw.shape != n or self.roll.shape != n or self.timestamps.shape != n:
            raise DimensionMismatch(
                f"{self.video_id}: channel lengths differ "
                f"(t={self.timestamps.shape}, p={n}, y={self.yaw.shape}, r={self.roll.shape})"
            )
        if n[0] > 1 and np.any(np.diff(self.timestamps) <= 0):
            raise DataError(f"{self.video_id}: timestamps must be strictly increasing")

    @classmethod
    def from_angles(cls, video_id, angles, fps=DEFAULT_FPS, t0=0.0):
        """Build a series from a ``(T, 3)`` pitch/yaw/roll array sampled at ``fps``."""
        angles = np.asarray(angles, dtype=float)
        if angles.ndim != 2 or angles.shape[1] != 3:
            raise DimensionMismatch(f"expected (T, 3) angles, got {angles.shape}")
        t = t0 + np.arange(angles.shape[0]) / fps
        return cls(video_id, fps, t, angles[:, 0], angles[:, 1], angles[:, 2])

    def __len__(self):
        return self.pitch.shape[0]

    @property
    def angles(self):
        """``(T, 3)`` view of pitch, yaw, roll."""
        return np.column_stack([self.pitch, self.yaw, self.roll])

    @property
    def duration(self):
        return len(self) / self.fps

    def frames(self, start, stop, video_id=None):
        """Sub-series over frame indices ``[start, stop)``."""
        sl = slice(start, stop)
        return HeadPoseSeries(
            video_id if video_id is not None else self.video_id,
            self.fps,
            self.timestamps[sl],
            self.pitch[sl],
            self.yaw[sl],
            self.roll[sl],
        )

    def resample(self, fps):
        """Linearly interpolate onto a regular grid at ``fps``.

        Returns ``self`` when the rate already matches.
        """
        if np.isclose(fps, self.fps) and _is_regular(self.timestamps, self.fps):
            return self
        t, values = resample_frames(self.timestamps, self.angles, fps)
        return HeadPoseSeries(self.video_id, fps, t, values[:, 0], values[:, 1], values[:, 2])


def _is_regular(timestamps, fps):
    if timestamps.shape[0] < 2:
        return True
    return np.allclose(np.diff(timestamps), 1.0 / fps, rtol=1e-3, atol=1e-6)


def resample_frames(timestamps, values, fps):
    """Resample ``values`` (``(T, C)``) onto ``t0 + k / fps`` by linear interpolation."""
    timestamps = np.asarray(timestamps, dtype=float)
    values = np.asarray(values, dtype=float)
    if timestamps.shape[0] < 2:
        return timestamps.copy(), values.copy()
    span = timestamps[-1] - timestamps[0]
    n = int(np.floor(span * fps + 1e-9)) + 1
    grid = timestamps[0] + np.arange(n) / fps
    out = np.column_stack(
        [np.interp(grid, timestamps, values[:, j]) for j in range(values.shape[1])]
    )
    return grid, out


@dataclass(eq=False)
class SegmentMatrix:
    """Segment vectors as columns of a ``(3 * ell, s)`` matrix."""

    columns: np.ndarray
    segment_len_frames: int
    step_frames: int
    source_ids: list = field(default_factory=list)

    def __post_init__(self):
        self.columns = np.asarray(self.columns, dtype=float)
        if self.columns.ndim != 2 or self.columns.shape[0] != 3 * self.segment_len_frames:
            raise DimensionMismatch(
                f"columns must have {3 * self.segment_len_frames} rows, got {self.columns.shape}"
            )
        if self.step_frames < 1:
            raise ConfigError("step_frames must be >= 1")

    @property
    def n_columns(self):
        return self.columns.shape[1]


@dataclass(frozen=True)
class ChannelOffsets:
    """Per-channel additive shift making training angles non-negative."""

    pitch_offset: float = 0.0
    yaw_offset: float = 0.0
    roll_offset: float = 0.0

    def as_array(self):
        return np.array([self.pitch_offset, self.yaw_offset, self.roll_offset])

    def row_vector(self, ell):
        """Offset for each of the ``3 * ell`` rows of a segment column."""
        return np.repeat(self.as_array(), ell)

    def shift(self, columns, clamp=True):
        """Add offsets to ``(3 * ell, n)`` columns; optionally clamp negatives to 0."""
        columns = np.asarray(columns, dtype=float)
        ell = columns.shape[0] // 3
        out = columns + self.row_vector(ell)[:, None] if columns.ndim == 2 else columns + self.row_vector(ell)
        if clamp:
            n_neg = int(np.count_nonzero(out < 0))
            if n_neg:
                logger.warning("clamping %d shifted values below the training minimum to 0", n_neg)
                out = np.maximum(out, 0.0)
        return out


def segment_series(series, segment_len_s=2.0, overlap_fraction=0.5):
    """Cut ``series`` into overlapping windows.

    Parameters
    ----------
    series : HeadPoseSeries
    segment_len_s : float
        Window length in seconds; converted to ``ell`` frames at the series fps.
    overlap_fraction : float
        Fraction of a window shared with the next one, in ``[0, 1)``.

    Returns
    -------
    SegmentMatrix
        ``floor((T - ell) / step) + 1`` columns, trailing frames dropped.
    """
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidOverlap(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    ell = frames_for(segment_len_s, series.fps)
    if ell < 2:
        raise ConfigError(f"segment of {segment_len_s}s at {series.fps} fps spans {ell} frame(s); need >= 2")
    step = max(1, frames_for(ell * (1.0 - overlap_fraction), 1.0))
    return segment_frames(series, ell, step)


def segment_frames(series, ell, step):
    """Frame-level form of :func:`segment_series`."""
    T = len(series)
    if T < ell:
        raise SeriesTooShort(f"{series.video_id}: {T} frames < segment length {ell}")
    # (3, n_starts, ell), every step-th start kept
    win = sliding_window_view(series.angles.T, ell, axis=1)[:, ::step, :]
    cols = np.concatenate([win[0].T, win[1].T, win[2].T], axis=0)
    ids = [(series.video_id, i) for i in range(cols.shape[1])]
    return SegmentMatrix(np.ascontiguousarray(cols), ell, step, ids)


def stack_and_shift(per_video):
    """Concatenate segment matrices and shift each channel to be non-negative.

    The offset of a channel is minus its global minimum over all columns, or 0
    when that minimum is already non-negative.
    """
    per_video = list(per_video)
    if not per_video:
        raise EmptyInput("no segment matrices given")
    ell = per_video[0].segment_len_frames
    step = per_video[0].step_frames
    for m in per_video[1:]:
        if m.segment_len_frames != ell or m.step_frames != step:
            raise MixedSegmentLength(
                f"segment geometry differs: ({ell}, {step}) vs ({m.segment_len_frames}, {m.step_frames})"
            )
    cols = np.concatenate([m.columns for m in per_video], axis=1)
    if cols.shape[1] == 0:
        raise EmptyInput("segment matrices hold no columns")
    ids = [sid for m in per_video for sid in m.source_ids]
    mins = cols.reshape(3, ell, -1).min(axis=(1, 2))
    offsets = ChannelOffsets(*(float(max(0.0, -m)) for m in mins))
    shifted = offsets.shift(cols, clamp=False)
    # x - min(x) is never negative in IEEE arithmetic; this only clears -0.0
    shifted = np.maximum(shifted, 0.0)
    return SegmentMatrix(shifted, ell, step, ids), offsets


def unshift_column(column, offsets):
    """Map a shifted segment column back to a ``(3, ell)`` pitch/yaw/roll array."""
    column = np.asarray(column, dtype=float)
    if column.ndim != 1 or column.shape[0] % 3:
        raise DimensionMismatch(f"column dimension {column.shape} is not a multiple of 3")
    ell = column.shape[0] // 3
    return column.reshape(3, ell) - offsets.as_array()[:, None]
