"""Synthetic corpora with a planted kineme codebook, used as a ground-truth oracle."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..action_units import N_AUS, AUFrameTrack
from ..pose import DEFAULT_FPS, HeadPoseSeries, frames_for


def default_planted(n_kinemes=4, ell=60, fps=DEFAULT_FPS, amplitude=0.15):
    """``(K, 3, ell)`` planted trajectories.

    Kineme ``j`` moves channel ``j % 3`` with a sine or cosine of an integer
    number of cycles per second, so every trajectory is periodic with period
    1 s. With 1 s window steps, any window lying inside a run of one kineme
    sees exactly that kineme's trajectory.
    """
    t = np.arange(ell) / fps
    out = np.zeros((n_kinemes, 3, ell))
    for j in range(n_kinemes):
        kind = j // 3
        cycles = 1 + kind // 2
        phase = 0.0 if kind % 2 == 0 else np.pi / 2
        out[j, j % 3] = amplitude * np.sin(2 * np.pi * cycles * t + phase)
    return out


@dataclass
class SynthConfig:
    n_kinemes: int = 4
    n_videos: int = 200
    duration_s: float = 20.0
    fps: float = DEFAULT_FPS
    segment_len_s: float = 2.0
    step_s: float = 1.0
    noise: float = 0.005  # radians, i.i.d. Gaussian per sample
    persistence: float = 0.8  # probability of repeating the previous kineme
    high_symbols: tuple = (1, 2)  # 1-based; score = fraction of units drawn from these
    planted: np.ndarray | None = None  # (K, 3, ell); default_planted when None
    au_noise: float = 0.1
    trait: str = "trait"
    seed: int = 0

    def __post_init__(self):
        if self.n_kinemes < 2:
            raise ValueError("n_kinemes must be >= 2")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")


@dataclass(eq=False)
class SynthVideo:
    video_id: str
    pose: HeadPoseSeries
    aus: AUFrameTrack
    unit_symbols: np.ndarray  # planted kineme per ell-frame unit, 1-based
    window_symbols: np.ndarray  # ground truth per window; 0 marks a boundary window
    score: float


@dataclass(eq=False)
class SynthDataset:
    config: SynthConfig
    planted: np.ndarray
    videos: list = field(default_factory=list)

    @property
    def scores(self):
        return np.array([v.score for v in self.videos])


def au_profile(symbol, n_aus=N_AUS):
    """AU channels raised while kineme ``symbol`` (1-based) is active."""
    j = symbol - 1
    return ((2 * j) % n_aus, (2 * j + 1) % n_aus)


def _draw(rng, probs):
    return int(rng.choice(len(probs), p=probs)) + 1


def synth_generate(cfg=None):
    """Generate a corpus: pose series, AU tracks, planted symbols and trait scores.

    Each video draws a propensity ``u ~ U(0, 1)``; fresh kineme draws pick a
    high symbol with total probability ``u``. Consecutive units repeat the
    previous kineme with probability ``persistence``. The trait score is the
    fraction of units carrying a high symbol.
    """
    cfg = cfg or SynthConfig()
    rng = np.random.default_rng(cfg.seed)
    ell = frames_for(cfg.segment_len_s, cfg.fps)
    step = frames_for(cfg.step_s, cfg.fps)
    planted = cfg.planted if cfg.planted is not None else default_planted(cfg.n_kinemes, ell, cfg.fps)
    planted = np.asarray(planted, dtype=float)
    K = planted.shape[0]
    if planted.shape[1:] != (3, ell):
        raise ValueError(f"planted trajectories must be (K, 3, {ell}), got {planted.shape}")
    high = np.zeros(K, dtype=bool)
    high[[s - 1 for s in cfg.high_symbols if 1 <= s <= K]] = True
    n_frames = frames_for(cfg.duration_s, cfg.fps)
    n_units = -(-n_frames // ell)

    videos = []
    for v in range(cfg.n_videos):
        u = rng.random()
        probs = np.where(high, u / max(high.sum(), 1), (1 - u) / max((~high).sum(), 1))
        probs = probs / probs.sum()
        units = np.empty(n_units, dtype=int)
        units[0] = _draw(rng, probs)
        for i in range(1, n_units):
            units[i] = units[i - 1] if rng.random() < cfg.persistence else _draw(rng, probs)

        angles = np.concatenate([planted[s - 1].T for s in units], axis=0)[:n_frames]
        angles = angles + rng.normal(0.0, cfg.noise, angles.shape) if cfg.noise > 0 else angles
        frame_sym = np.repeat(units, ell)[:n_frames]

        intens = np.abs(rng.normal(0.3, cfg.au_noise, (n_frames, N_AUS)))
        for s in range(1, K + 1):
            rows = frame_sym == s
            for a in au_profile(s):
                intens[rows, a] += 2.0

        n_win = (n_frames - ell) // step + 1
        win_sym = np.zeros(n_win, dtype=int)
        for i in range(n_win):
            seg = frame_sym[i * step: i * step + ell]
            if np.all(seg == seg[0]):
                win_sym[i] = seg[0]

        vid = f"synth_{v:04d}"
        pose = HeadPoseSeries.from_angles(vid, angles, cfg.fps)
        aus = AUFrameTrack(vid, cfg.fps, pose.timestamps.copy(), intens)
        score = float(np.mean(high[units - 1]))
        videos.append(SynthVideo(vid, pose, aus, units, win_sym, score))
    return SynthDataset(cfg, planted, videos)
