"""Reading and writing OpenFace-style per-frame CSV files."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..action_units import AU_NAMES, AUFrameTrack
from ..exceptions import DataError, EmptyFile, MalformedRow, MissingColumn
from ..pose import DEFAULT_FPS, HeadPoseSeries


@dataclass
class ColumnConfig:
    """Column names to read, and the unit of the pose columns."""

    frame: str = "frame"
    timestamp: str = "timestamp"
    pitch: str = "pose_Rx"
    yaw: str = "pose_Ry"
    roll: str = "pose_Rz"
    aus: tuple = tuple(f"{n}_r" for n in AU_NAMES)
    angle_unit: str = "rad"  # or "deg"

    def __post_init__(self):
        self.aus = tuple(self.aus)
        if self.angle_unit not in ("rad", "deg"):
            raise DataError(f"angle_unit must be 'rad' or 'deg', got {self.angle_unit!r}")


@dataclass
class LoadReport:
    path: str
    n_rows: int = 0
    n_parsed: int = 0
    n_dropped: int = 0
    dropped_rows: list = field(default_factory=list)


def parse_openface_csv(path, columns=None, fps=None, video_id=None, return_report=False):
    """Parse one OpenFace output file into a pose series and an AU track.

    Rows with a missing or NaN value in any required column are dropped and
    counted; a non-numeric value raises :class:`MalformedRow` with the 1-based
    data-row number. ``fps`` defaults to the reciprocal median timestamp step.
    """
    columns = columns or ColumnConfig()
    path = Path(path)
    video_id = video_id or path.stem
    with open(path, newline="") as fh:
        reader = csv.reader(fh, skipinitialspace=True)
        header = next(reader, None)
        if not header:
            raise EmptyFile(f"{path}: no header row")
        header = [h.strip() for h in header]
        index = {h: i for i, h in enumerate(header)}
        wanted = [columns.timestamp, columns.pitch, columns.yaw, columns.roll, *columns.aus]
        missing = [c for c in wanted if c not in index]
        if missing:
            raise MissingColumn(*missing)
        cols = [index[c] for c in wanted]

        report = LoadReport(str(path))
        rows = []
        for n, raw in enumerate(reader, start=1):
            if not raw or all(not v.strip() for v in raw):
                continue
            report.n_rows += 1
            if len(raw) != len(header):
                raise MalformedRow(n, f"{len(raw)} fields, header has {len(header)}")
            values = []
            for c in cols:
                text = raw[c].strip()
                if text == "":
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise MalformedRow(n, f"column {header[c]!r} holds {text!r}") from None
            if any(math.isnan(v) for v in values):
                report.n_dropped += 1
                report.dropped_rows.append(n)
                continue
            rows.append(values)
    if not rows:
        raise EmptyFile(f"{path}: no usable data rows")
    report.n_parsed = len(rows)

    data = np.array(rows)
    t = data[:, 0]
    angles = data[:, 1:4]
    if columns.angle_unit == "deg":
        angles = np.deg2rad(angles)
    if fps is None:
        fps = 1.0 / float(np.median(np.diff(t))) if len(t) > 1 else DEFAULT_FPS
    pose = HeadPoseSeries(video_id, float(fps), t, angles[:, 0], angles[:, 1], angles[:, 2])
    intens = np.maximum(data[:, 4:], 0.0)
    aus = AUFrameTrack(video_id, float(fps), t.copy(), intens, tuple(c.removesuffix("_r") for c in columns.aus))
    if return_report:
        return pose, aus, report
    return pose, aus


def write_openface_csv(path, pose, aus=None, columns=None):
    """Write a minimal OpenFace-layout CSV (frame, timestamp, success, pose, AU intensities)."""
    columns = columns or ColumnConfig()
    T = len(pose)
    if aus is not None and len(aus) != T:
        raise DataError("pose and AU track lengths differ")
    au_vals = aus.intensities if aus is not None else np.zeros((T, len(columns.aus)))
    angles = pose.angles if columns.angle_unit == "rad" else np.rad2deg(pose.angles)
    header = [columns.frame, columns.timestamp, "success", columns.pitch, columns.yaw, columns.roll, *columns.aus]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(T):
            w.writerow([i + 1, repr(float(pose.timestamps[i])), 1,
                        *(repr(float(v)) for v in angles[i]), *(repr(float(v)) for v in au_vals[i])])
