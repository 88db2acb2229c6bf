"""Thin-slice chunking and corpus encoding."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..action_units import dominant_au_sequence
from ..codebook import encode_series
from ..dataset import EncodedChunk, EncodedVideo
from ..exceptions import ChunkTooShort, ConfigError
from ..pose import frames_for

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChunkSpec:
    length_s: float
    remainder: str = "drop"

    def __post_init__(self):
        if not self.length_s > 0:
            raise ConfigError("chunk length must be positive")
        if self.remainder != "drop":
            raise ConfigError("only the 'drop' remainder policy is supported")


@dataclass(eq=False)
class ChunkPair:
    index: int
    pose: object
    aus: object


def chunk_series(pose, aus, spec, min_len_s=2.0):
    """Split aligned pose/AU streams into consecutive non-overlapping chunks.

    Both streams must share the frame rate; the trailing partial chunk is
    dropped. Chunk ``i`` is named ``<video_id>#<i>``.
    """
    if spec.length_s < min_len_s:
        raise ChunkTooShort(f"chunk of {spec.length_s}s is shorter than the {min_len_s}s analysis window")
    n = len(pose) if aus is None else min(len(pose), len(aus))
    size = frames_for(spec.length_s, pose.fps)
    out = []
    for i in range(n // size):
        a, b = i * size, (i + 1) * size
        cid = f"{pose.video_id}#{i}"
        out.append(ChunkPair(i, pose.frames(a, b, cid), aus.frames(a, b, cid) if aus is not None else None))
    return out


def encode_chunk(pair, codebook, au_window_s=2.0, au_step_s=1.0, video_id=None):
    """Kineme symbols, AU dominance and flattened pose for one chunk.

    The two symbol streams are truncated to their common length so they can be
    fed jointly to the fusion network.
    """
    kin = encode_series(pair.pose, codebook).symbols
    if pair.aus is not None:
        dom = dominant_au_sequence(pair.aus.resample(codebook.fps), au_window_s, au_step_s).dominance
    else:
        dom = np.zeros((len(kin), 17), dtype=np.int8)
    n = min(len(kin), len(dom))
    if len(kin) != len(dom):
        logger.debug("%s: %d kineme vs %d AU windows; truncating", pair.pose.video_id, len(kin), len(dom))
    pose = pair.pose.resample(codebook.fps).angles.ravel()
    return EncodedChunk(video_id or pair.pose.video_id, pair.index, kin[:n], dom[:n], pose)


def encode_video(video_id, pose, aus, codebook, scores, split=None, chunk_s=None,
                 au_window_s=2.0, au_step_s=1.0):
    """Encode a whole video, optionally cut into chunks of ``chunk_s`` seconds."""
    pose = pose.resample(codebook.fps)
    aus = aus.resample(codebook.fps) if aus is not None else None
    if chunk_s is None:
        n = len(pose) if aus is None else min(len(pose), len(aus))
        pairs = [ChunkPair(0, pose.frames(0, n), aus.frames(0, n) if aus is not None else None)]
    else:
        pairs = chunk_series(pose, aus, ChunkSpec(chunk_s), codebook.segment_len_frames / codebook.fps)
    chunks = [encode_chunk(p, codebook, au_window_s, au_step_s, video_id) for p in pairs]
    return EncodedVideo(video_id, dict(scores), chunks, split)
