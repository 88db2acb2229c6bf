import json

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from kineme.codebook import (
    Codebook,
    CodebookConfig,
    KinemeEncoder,
    encode_segments,
    encode_series,
    kineme_trajectories,
    learn_kinemes,
)
from kineme.exceptions import InsufficientData, SeriesTooShort
from kineme.mixture import GaussianMixture
from kineme.pipeline.synth import SynthConfig, default_planted, synth_generate
from kineme.pose import ChannelOffsets, HeadPoseSeries, unshift_column


def test_default_config():
    cfg = CodebookConfig()
    assert (cfg.n_kinemes, cfg.segment_len_s, cfg.overlap) == (16, 2.0, 0.5)
    assert cfg.effective_rank == 16
    assert cfg.geometry() == (60, 30)


def test_codebook_consistency(small_codebook):
    cb = small_codebook
    for j in range(cb.n_kinemes):
        expect = unshift_column(cb.basis @ cb.centroids[:, j], cb.offsets)
        np.testing.assert_allclose(cb.trajectories[j], expect, atol=1e-9)
    assert cb.mixture.k == cb.n_kinemes
    w = cb.mixture.weights
    assert np.all(np.diff(w) <= 0)  # kineme 1 is the most frequent


def test_planted_trajectories_recovered(small_synth, small_codebook):
    planted = small_synth.planted
    learned = small_codebook.trajectories
    cost = np.array([[np.sqrt(np.mean((p - q) ** 2)) for q in learned] for p in planted])
    rows, cols = linear_sum_assignment(cost)
    rms = np.sqrt(np.mean(planted**2, axis=(1, 2)))
    assert np.mean(cost[rows, cols] / rms) <= 0.10


def test_identical_segments_collapse():
    seg = default_planted(1)[0]
    angles = np.tile(seg.T, (10, 1)) + 0.2
    series = [HeadPoseSeries.from_angles(f"v{i}", angles) for i in range(10)]
    cb = learn_kinemes(series, n_kinemes=2, rank=1, overlap=0.0)
    for j in range(2):
        np.testing.assert_allclose(cb.trajectories[j], seg + 0.2, atol=1e-6)


def test_insufficient_data():
    s = HeadPoseSeries.from_angles("v", np.zeros((120, 3)))
    with pytest.raises(InsufficientData):
        learn_kinemes([s], n_kinemes=16)


def test_encode_length_and_errors(small_codebook):
    s = HeadPoseSeries.from_angles("v", np.random.default_rng(0).normal(0, 0.05, (450, 3)))
    seq = encode_series(s, small_codebook)
    assert len(seq) == 14
    assert seq.symbols.min() >= 1 and seq.symbols.max() <= 4
    np.testing.assert_allclose(seq.window_starts, np.arange(14) * 1.0)
    with pytest.raises(SeriesTooShort):
        encode_series(HeadPoseSeries.from_angles("v", np.zeros((30, 3))), small_codebook)


def test_encode_deterministic_and_shift_invariant(small_synth, small_codebook):
    s = small_synth.videos[0].pose
    a = encode_series(s, small_codebook).symbols
    np.testing.assert_array_equal(a, encode_series(s, small_codebook).symbols)
    shifted = s.frames(small_codebook.step_frames, len(s))
    np.testing.assert_array_equal(encode_series(shifted, small_codebook).symbols, a[1:])


def _planted_codebook(planted):
    """Codebook whose basis columns are the shifted planted trajectories (r = K, C* = I)."""
    K, _, ell = planted.shape
    off = ChannelOffsets(0.2, 0.2, 0.2)
    B = (planted.reshape(K, 3 * ell) + 0.2).T
    mix = GaussianMixture(np.full(K, 1.0 / K), np.eye(K), np.full((K, K), 0.01))
    return Codebook(B, mix, off, ell, 30, 30.0)


def test_planted_codebook_encodes_repeated_kineme():
    planted = default_planted(4)
    cb = _planted_codebook(planted)
    g = np.random.default_rng(0)
    for j in range(4):
        angles = np.tile(planted[j].T, (8, 1)) + g.normal(0, 0.005, (480, 3))
        seq = encode_series(HeadPoseSeries.from_angles("v", angles), cb).symbols
        assert np.mean(seq == j + 1) >= 0.9


def test_identity_centroids_trajectories():
    planted = default_planted(4)
    cb = _planted_codebook(planted)
    traj, table = kineme_trajectories(cb)
    for j in range(4):
        np.testing.assert_allclose(traj[j], unshift_column(cb.basis[:, j], cb.offsets), atol=1e-12)
    assert list(table.columns) == ["kineme", "time_s", "pitch", "yaw", "roll"]
    assert table.kineme.tolist()[:: 60] == [1, 2, 3, 4]


def test_segment_at_component_mean_maps_to_that_kineme():
    planted = default_planted(4)
    cb = _planted_codebook(planted)
    for j in range(4):
        col = cb.basis @ cb.mixture.means[j] - 0.2  # unshifted
        assert encode_segments(col[:, None], cb)[0] == j + 1


def test_roundtrip_trajectory_encoding(small_codebook):
    cb = small_codebook
    cols = np.stack([cb.trajectories[j].ravel() for j in range(cb.n_kinemes)], axis=1)
    np.testing.assert_array_equal(encode_segments(cols, cb), np.arange(1, cb.n_kinemes + 1))


def test_json_roundtrip_bit_identical(small_codebook, tmp_path):
    text = small_codebook.dumps()
    d = json.loads(text)
    for key in ("version", "K", "r", "ell", "step", "fps", "offsets", "B", "weights", "means", "variances",
                "centroids"):
        assert key in d
    again = Codebook.from_dict(d)
    assert again.dumps() == text
    small_codebook.save(tmp_path / "cb.json")
    loaded = Codebook.load(tmp_path / "cb.json")
    assert loaded.dumps() == text
    np.testing.assert_array_equal(loaded.basis, small_codebook.basis)


def test_learn_deterministic():
    ds = synth_generate(SynthConfig(n_videos=12, seed=5))
    series = [v.pose for v in ds.videos]
    a = learn_kinemes(series, n_kinemes=4, seed=2)
    b = learn_kinemes(series, n_kinemes=4, seed=2)
    assert a.dumps() == b.dumps()


def test_encoder_estimator(small_synth):
    series = [v.pose for v in small_synth.videos[:15]]
    enc = KinemeEncoder(n_kinemes=4, random_state=0).fit(series)
    out = enc.transform(series[:2])
    assert len(out) == 2 and len(out[0]) == 19
    assert enc.get_params()["n_kinemes"] == 4
