"""Kineme learning (NMF + GMM over pose windows) and kineme encoding."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError, DataError, InsufficientData, SeriesTooShort
from .factorization import nmf_fit, nnls_project_many
from .mixture import GaussianMixture, cluster_centroids, gmm_fit, reorder_components
from .pose import (
    DEFAULT_FPS,
    ChannelOffsets,
    frames_for,
    segment_frames,
    stack_and_shift,
    unshift_column,
)

logger = logging.getLogger(__name__)

CODEBOOK_VERSION = 1


@dataclass
class CodebookConfig:
    n_kinemes: int = 16
    rank: int | None = None  # defaults to n_kinemes
    segment_len_s: float = 2.0
    overlap: float = 0.5
    fps: float = DEFAULT_FPS
    nmf_max_iters: int = 1000
    nmf_tol: float = 1e-7
    gmm_max_iters: int = 300
    gmm_tol: float = 1e-9
    covariance_type: str = "diag"
    seed: int = 0

    @property
    def effective_rank(self):
        return self.n_kinemes if self.rank is None else self.rank

    def geometry(self):
        """``(ell, step)`` in frames at the canonical fps."""
        if not 0.0 <= self.overlap < 1.0:
            raise ConfigError(f"overlap must be in [0, 1), got {self.overlap}")
        ell = frames_for(self.segment_len_s, self.fps)
        if ell < 2:
            raise ConfigError(f"segment length {self.segment_len_s}s is under 2 frames at {self.fps} fps")
        step = max(1, frames_for(ell * (1.0 - self.overlap), 1.0))
        return ell, step


@dataclass(eq=False)
class Codebook:
    basis: np.ndarray  # (3 ell, r)
    mixture: GaussianMixture
    offsets: ChannelOffsets
    segment_len_frames: int
    step_frames: int
    fps: float
    centroids: np.ndarray = None  # (r, K)
    trajectories: np.ndarray = None  # (K, 3, ell), angle space
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.centroids is None:
            self.centroids = cluster_centroids(self.mixture)
        if self.trajectories is None:
            self.trajectories = np.stack(
                [unshift_column(col, self.offsets) for col in (self.basis @ self.centroids).T]
            )

    @property
    def n_kinemes(self):
        return self.mixture.k

    @property
    def rank(self):
        return self.basis.shape[1]

    def to_dict(self):
        mix = self.mixture
        return {
            "version": CODEBOOK_VERSION,
            "K": int(mix.k),
            "r": int(self.rank),
            "ell": int(self.segment_len_frames),
            "step": int(self.step_frames),
            "fps": float(self.fps),
            "offsets": asdict(self.offsets),
            "covariance_type": mix.covariance_type,
            "B": [float(v) for v in self.basis.ravel(order="C")],
            "weights": mix.weights.tolist(),
            "means": mix.means.tolist(),
            "variances": mix.variances.tolist(),
            "centroids": self.centroids.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != CODEBOOK_VERSION:
            raise DataError(f"unsupported codebook version {d.get('version')!r}")
        ell, r = int(d["ell"]), int(d["r"])
        basis = np.asarray(d["B"], dtype=float).reshape(3 * ell, r)
        mix = GaussianMixture(
            np.asarray(d["weights"], dtype=float),
            np.asarray(d["means"], dtype=float),
            np.asarray(d["variances"], dtype=float),
            d.get("covariance_type", "diag"),
        )
        if mix.k != int(d["K"]):
            raise DataError("codebook K disagrees with mixture size")
        return cls(
            basis,
            mix,
            ChannelOffsets(**d["offsets"]),
            ell,
            int(d["step"]),
            float(d["fps"]),
            centroids=np.asarray(d["centroids"], dtype=float),
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(eq=False)
class KinemeSequence:
    """Kineme symbols (1-based) for consecutive windows of one series."""

    video_id: str
    window_starts: np.ndarray
    symbols: np.ndarray

    def __post_init__(self):
        self.window_starts = np.asarray(self.window_starts, dtype=float)
        self.symbols = np.asarray(self.symbols, dtype=int)

    def __len__(self):
        return self.symbols.shape[0]

    def one_hot(self, n_kinemes):
        out = np.zeros((len(self), n_kinemes))
        out[np.arange(len(self)), self.symbols - 1] = 1.0
        return out


def learn_kinemes(training, config=None, **overrides):
    """Learn a kineme codebook from a list of :class:`HeadPoseSeries`.

    Pipeline: window every series, stack and shift to non-negative, factor
    with NMF, cluster the coefficient columns with a GMM, and map the cluster
    means back to angle space through the basis. Components are renumbered by
    descending mixture weight so kineme 1 is the most frequent.
    """
    cfg = config if config is not None else CodebookConfig()
    if overrides:
        cfg = CodebookConfig(**{**asdict(cfg), **overrides})
    training = list(training)
    if not training:
        raise InsufficientData("no training series")
    ell, step = cfg.geometry()
    K, r = cfg.n_kinemes, cfg.effective_rank

    mats = []
    for s in training:
        s = s.resample(cfg.fps)
        if len(s) < ell:
            logger.info("skipping %s: %d frames < %d", s.video_id, len(s), ell)
            continue
        mats.append(segment_frames(s, ell, step))
    n_cols = sum(m.n_columns for m in mats)
    need = max(10 * K, r + 1)
    if n_cols < need:
        raise InsufficientData(f"{n_cols} training segments; need at least {need}")

    H, offsets = stack_and_shift(mats)
    factors = nmf_fit(H.columns, r, cfg.nmf_max_iters, cfg.nmf_tol, cfg.seed)
    mixture = gmm_fit(factors.coefficients.T, K, cfg.gmm_max_iters, cfg.gmm_tol, cfg.seed + 1,
                      cfg.covariance_type)
    order = np.argsort(-mixture.weights, kind="stable")
    mixture = reorder_components(mixture, order)
    meta = {
        "n_training_series": len(mats),
        "n_segments": n_cols,
        "nmf_objective": factors.final_objective,
        "nmf_iters": factors.n_iter,
        "gmm_iters": mixture.n_iter,
        "seed": cfg.seed,
    }
    return Codebook(factors.basis, mixture, offsets, ell, step, cfg.fps, meta=meta)


def segment_for_codebook(series, codebook):
    series = series.resample(codebook.fps)
    if len(series) < codebook.segment_len_frames:
        raise SeriesTooShort(
            f"{series.video_id}: {len(series)} frames < segment length {codebook.segment_len_frames}"
        )
    return series, segment_frames(series, codebook.segment_len_frames, codebook.step_frames)


def encode_segments(columns, codebook):
    """MAP kineme (1-based) for raw, unshifted ``(3 ell, n)`` segment columns."""
    shifted = codebook.offsets.shift(columns, clamp=True)
    coeffs = nnls_project_many(shifted, codebook.basis)
    # log_joint includes the mixture weights, so argmax is the MAP component
    return np.argmax(codebook.mixture.log_joint(coeffs.T), axis=1) + 1


def encode_series(series, codebook):
    """Kineme sequence of ``series``: one symbol per window."""
    series, seg = segment_for_codebook(series, codebook)
    starts = series.timestamps[np.arange(seg.n_columns) * codebook.step_frames]
    return KinemeSequence(series.video_id, starts, encode_segments(seg.columns, codebook))


def kineme_trajectories(codebook):
    """Angle-space kineme curves and a long-format table for plotting.

    Returns
    -------
    trajectories : ndarray of shape (K, 3, ell)
    table : DataFrame with columns kineme, time_s, pitch, yaw, roll
    """
    traj = codebook.trajectories
    K, _, ell = traj.shape
    t = np.arange(ell) / codebook.fps
    table = pd.DataFrame({
        "kineme": np.repeat(np.arange(1, K + 1), ell),
        "time_s": np.tile(t, K),
        "pitch": traj[:, 0, :].ravel(),
        "yaw": traj[:, 1, :].ravel(),
        "roll": traj[:, 2, :].ravel(),
    })
    return traj, table


class KinemeEncoder(TransformerMixin, BaseEstimator):
    """Learn a codebook in ``fit`` and map pose series to kineme sequences.

    ``X`` is a list of :class:`~kineme.pose.HeadPoseSeries`; ``transform``
    returns a list of :class:`KinemeSequence`.
    """

    def __init__(self, n_kinemes=16, rank=None, segment_len_s=2.0, overlap=0.5, fps=DEFAULT_FPS,
                 nmf_max_iters=1000, nmf_tol=1e-7, covariance_type="diag", random_state=0):
        self.n_kinemes = n_kinemes
        self.rank = rank
        self.segment_len_s = segment_len_s
        self.overlap = overlap
        self.fps = fps
        self.nmf_max_iters = nmf_max_iters
        self.nmf_tol = nmf_tol
        self.covariance_type = covariance_type
        self.random_state = random_state

    def _config(self):
        return CodebookConfig(
            n_kinemes=self.n_kinemes, rank=self.rank, segment_len_s=self.segment_len_s,
            overlap=self.overlap, fps=self.fps, nmf_max_iters=self.nmf_max_iters,
            nmf_tol=self.nmf_tol, covariance_type=self.covariance_type, seed=self.random_state,
        )

    def fit(self, X, y=None):
        self.codebook_ = learn_kinemes(X, self._config())
        return self

    def transform(self, X):
        check_is_fitted(self, "codebook_")
        return [encode_series(s, self.codebook_) for s in X]
