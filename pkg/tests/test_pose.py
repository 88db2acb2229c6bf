import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kineme.exceptions import DataError, DimensionMismatch, EmptyInput, InvalidOverlap, MixedSegmentLength, SeriesTooShort
from kineme.pose import (
    ChannelOffsets,
    HeadPoseSeries,
    frames_for,
    segment_frames,
    segment_series,
    stack_and_shift,
    unshift_column,
)


def _series(T, fps=30, seed=0, vid="v"):
    angles = np.random.default_rng(seed).normal(0, 0.1, (T, 3))
    return HeadPoseSeries.from_angles(vid, angles, fps)


def brute_force_starts(T, ell, step):
    return [s for s in range(0, T, step) if s + ell <= T]


def test_segment_count_example():
    m = segment_series(_series(450), 2.0, 0.5)
    assert m.segment_len_frames == 60 and m.step_frames == 30
    assert m.columns.shape == (180, 14)


def test_single_window_fits_exactly():
    for ov in (0.0, 0.25, 0.5, 0.9):
        assert segment_series(_series(60), 2.0, ov).n_columns == 1


def test_column_layout_pitch_yaw_roll():
    s = _series(100)
    m = segment_series(s, 1.0, 0.5)
    ell, step = 30, 15
    i = 3
    col = m.columns[:, i]
    np.testing.assert_array_equal(col[:ell], s.pitch[i * step:i * step + ell])
    np.testing.assert_array_equal(col[ell:2 * ell], s.yaw[i * step:i * step + ell])
    np.testing.assert_array_equal(col[2 * ell:], s.roll[i * step:i * step + ell])
    assert m.source_ids[i] == ("v", i)


@given(st.integers(1, 80), st.data())
def test_segment_count_matches_enumeration(T, data):
    ell = data.draw(st.integers(1, T))
    step = data.draw(st.integers(1, ell))
    m = segment_frames(_series(T), ell, step)
    starts = brute_force_starts(T, ell, step)
    assert m.n_columns == len(starts) == (T - ell) // step + 1


def test_half_overlap_shares_half_window():
    s = _series(300)
    m = segment_series(s, 2.0, 0.5)
    ell = 60
    a, b = m.columns[:ell, 4], m.columns[:ell, 5]
    np.testing.assert_array_equal(a[ell // 2:], b[:ell // 2])


def test_segment_errors():
    with pytest.raises(SeriesTooShort):
        segment_series(_series(50), 2.0, 0.5)
    with pytest.raises(InvalidOverlap):
        segment_series(_series(100), 2.0, 1.0)
    with pytest.raises(InvalidOverlap):
        segment_series(_series(100), 2.0, -0.1)


def test_series_validation():
    with pytest.raises(DimensionMismatch):
        HeadPoseSeries("x", 30, [0, 1], [0, 0], [0], [0, 0])
    with pytest.raises(DataError):
        HeadPoseSeries("x", 30, [0, 0], [0, 0], [0, 0], [0, 0])
    with pytest.raises(DataError):
        HeadPoseSeries("x", 0, [0], [0], [0], [0])


def test_frames_for_rounding():
    assert frames_for(2.0, 30) == 60
    assert frames_for(2.0, 25) == 50
    assert frames_for(0.5, 25) == 13  # 12.5 rounds half up


def test_resample_changes_rate():
    s = _series(50, fps=25)
    r = s.resample(30)
    assert r.fps == 30
    assert np.allclose(np.diff(r.timestamps), 1 / 30)
    assert r.timestamps[-1] <= s.timestamps[-1] + 1e-12
    np.testing.assert_allclose(r.pitch[0], s.pitch[0])


def _mat(values):
    """SegmentMatrix with ell=1 holding one value per channel per column."""
    values = np.asarray(values, dtype=float)
    s = HeadPoseSeries.from_angles("v", values)
    return segment_frames(s, 1, 1)


def test_stack_and_shift_example():
    H, off = stack_and_shift([_mat([[-0.2, 0, 0], [0.3, 0, 0]])])
    assert off.pitch_offset == pytest.approx(0.2)
    np.testing.assert_allclose(H.columns[0], [0.0, 0.5])


def test_non_negative_input_unchanged():
    m = _mat([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]])
    H, off = stack_and_shift([m])
    assert off.as_array().tolist() == [0, 0, 0]
    np.testing.assert_array_equal(H.columns, m.columns)


def test_stack_errors():
    with pytest.raises(EmptyInput):
        stack_and_shift([])
    a = segment_frames(_series(100), 10, 5)
    b = segment_frames(_series(100), 12, 6)
    with pytest.raises(MixedSegmentLength):
        stack_and_shift([a, b])


@given(st.integers(0, 10_000))
def test_shift_properties(seed):
    mats = [segment_frames(_series(40, seed=seed + i), 8, 4) for i in range(3)]
    H, off = stack_and_shift(mats)
    assert H.columns.min() >= 0
    per_channel = H.columns.reshape(3, 8, -1).min(axis=(1, 2))
    assert np.any(per_channel == 0.0)
    raw = np.concatenate([m.columns for m in mats], axis=1)
    for j in range(0, raw.shape[1], 7):
        back = unshift_column(H.columns[:, j], off)
        np.testing.assert_allclose(back.ravel(), raw[:, j], atol=1e-12)


def test_unshift_examples():
    zero = ChannelOffsets(0.0, 0.0, 0.0)
    x = np.arange(6.0)
    np.testing.assert_array_equal(unshift_column(x, zero), x.reshape(3, 2))
    out = unshift_column(np.full(6, 0.2), ChannelOffsets(0.2, 0.0, 0.0))
    np.testing.assert_allclose(out[0], 0.0)
    with pytest.raises(DimensionMismatch):
        unshift_column(np.zeros(5), zero)


def test_shift_clamps_below_training_minimum(caplog):
    off = ChannelOffsets(0.1, 0.1, 0.1)
    col = np.full((6, 1), -0.5)
    out = off.shift(col, clamp=True)
    assert out.min() == 0.0
    assert "clamp" in caplog.text.lower()
