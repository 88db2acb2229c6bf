"""Encoding a manifest into a corpus of chunks, and the corpus JSON format."""
from __future__ import annotations

import json

import numpy as np
from joblib import Parallel, delayed

from ..dataset import EncodedChunk, EncodedVideo
from ..exceptions import DataError
from .chunking import encode_video
from .openface import parse_openface_csv

CORPUS_VERSION = 1


def load_entry(manifest, entry, columns=None):
    return parse_openface_csv(manifest.path_of(entry), columns, fps=entry.fps, video_id=entry.video_id)


def _encode_entry(manifest, entry, codebook, columns, chunk_s, au_window_s, au_step_s):
    pose, aus = load_entry(manifest, entry, columns)
    return encode_video(entry.video_id, pose, aus, codebook, entry.scores, entry.split, chunk_s,
                        au_window_s, au_step_s)


def encode_manifest(manifest, codebook, columns=None, chunk_s=None, au_window_s=2.0, au_step_s=1.0,
                    jobs=1):
    """Encode every manifest entry; output order follows the manifest."""
    return Parallel(n_jobs=jobs)(
        delayed(_encode_entry)(manifest, e, codebook, columns, chunk_s, au_window_s, au_step_s)
        for e in manifest.entries
    )


def corpus_to_dict(videos, n_kinemes, traits, chunk_s=None):
    return {
        "version": CORPUS_VERSION,
        "n_kinemes": int(n_kinemes),
        "traits": list(traits),
        "chunk_s": chunk_s,
        "videos": [
            {
                "video_id": v.video_id,
                "split": v.split,
                "scores": v.scores,
                "chunks": [
                    {
                        "index": c.index,
                        "kinemes": c.kinemes.tolist(),
                        "aus": c.aus.tolist(),
                        "pose": None if c.pose is None else c.pose.tolist(),
                    }
                    for c in v.chunks
                ],
            }
            for v in videos
        ],
    }


def corpus_from_dict(d):
    if d.get("version") != CORPUS_VERSION:
        raise DataError(f"unsupported corpus version {d.get('version')!r}")
    videos = []
    for v in d["videos"]:
        chunks = [
            EncodedChunk(v["video_id"], c["index"], c["kinemes"], np.asarray(c["aus"]).reshape(-1, 17),
                         None if c.get("pose") is None else np.asarray(c["pose"], dtype=float))
            for c in v["chunks"]
        ]
        videos.append(EncodedVideo(v["video_id"], dict(v["scores"]), chunks, v.get("split")))
    return videos, d


def save_corpus(path, videos, n_kinemes, traits, chunk_s=None):
    with open(path, "w") as fh:
        json.dump(corpus_to_dict(videos, n_kinemes, traits, chunk_s), fh)


def load_corpus(path):
    """Returns ``(videos, header)``; ``header`` carries n_kinemes, traits, chunk_s."""
    with open(path) as fh:
        d = json.load(fh)
    videos, d = corpus_from_dict(d)
    header = {k: d.get(k) for k in ("n_kinemes", "traits", "chunk_s")}
    return videos, header
