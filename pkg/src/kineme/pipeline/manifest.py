"""Dataset manifests: one JSON document listing videos, feature files, scores and splits."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions import DataError

MANIFEST_VERSION = 1
OCEAN = ("O", "C", "E", "A", "N")
INTERVIEW = ("Ov", "RH", "Ex", "EC", "Fr")


@dataclass
class VideoManifestEntry:
    video_id: str
    features: str  # CSV path as written in the manifest (relative to the manifest dir)
    scores: dict = field(default_factory=dict)
    split: str | None = None
    fps: float | None = None

    def to_dict(self):
        d = {"video_id": self.video_id, "features": self.features, "scores": dict(self.scores)}
        if self.split is not None:
            d["split"] = self.split
        if self.fps is not None:
            d["fps"] = self.fps
        return d


@dataclass
class Manifest:
    dataset: str
    traits: tuple
    entries: list = field(default_factory=list)
    root: Path = field(default_factory=Path.cwd)

    def path_of(self, entry):
        p = Path(entry.features)
        return p if p.is_absolute() else self.root / p

    def split(self, name):
        return [e for e in self.entries if e.split == name]

    def to_dict(self):
        return {
            "version": MANIFEST_VERSION,
            "dataset": self.dataset,
            "traits": list(self.traits),
            "entries": [e.to_dict() for e in self.entries],
        }

    def validate(self, check_paths=True):
        seen = set()
        for e in self.entries:
            if e.video_id in seen:
                raise DataError(f"duplicate video_id {e.video_id!r}")
            seen.add(e.video_id)
            for name, s in e.scores.items():
                if name not in self.traits:
                    raise DataError(f"{e.video_id}: trait {name!r} not declared in the manifest")
                if not 0.0 <= float(s) <= 1.0:
                    raise DataError(f"{e.video_id}: score {name}={s} outside [0, 1]")
            if check_paths and not self.path_of(e).exists():
                raise DataError(f"{e.video_id}: feature file {self.path_of(e)} does not exist")
        return self


def load_manifest(path, check_paths=True):
    path = Path(path)
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    if d.get("version") != MANIFEST_VERSION:
        raise DataError(f"{path}: unsupported manifest version {d.get('version')!r}")
    entries = [
        VideoManifestEntry(e["video_id"], e["features"], dict(e.get("scores", {})), e.get("split"), e.get("fps"))
        for e in d["entries"]
    ]
    m = Manifest(d.get("dataset", path.stem), tuple(d["traits"]), entries, path.parent.resolve())
    return m.validate(check_paths)


def save_manifest(manifest, path):
    with open(path, "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=1)
