import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kineme.action_units import TIE_RTOL, AU_CODES, AU_NAMES, AUFrameTrack, DominantAUTransformer, dominant_au_sequence
from kineme.exceptions import DataError, TrackTooShort


def _track(intens, fps=30):
    intens = np.asarray(intens, float)
    return AUFrameTrack("v", fps, np.arange(len(intens)) / fps, intens)


def test_channel_order():
    assert AU_CODES == (1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 17, 20, 23, 25, 26, 45)
    assert AU_NAMES[0] == "AU01" and AU_NAMES[-1] == "AU45" and len(AU_NAMES) == 17


def test_au12_dominant():
    x = np.ones((60, 17))
    i12 = AU_CODES.index(12)
    x[10, i12] = 3.0
    x[10:12, 0] = 0.0  # keeps the all-AU window mean at exactly 1.0
    assert x.mean() == 1.0
    seq = dominant_au_sequence(_track(x))
    assert seq.dominance[0, i12] == 1


def test_constant_intensities_no_dominance():
    seq = dominant_au_sequence(_track(np.full((90, 17), 2.5)))
    assert seq.dominance.sum() == 0


def test_window_count_and_defaults():
    seq = dominant_au_sequence(_track(np.random.default_rng(0).random((450, 17))))
    assert len(seq) == (15 - 2) // 1 + 1
    assert (seq.window_len_s, seq.step_s) == (2.0, 1.0)
    np.testing.assert_allclose(seq.window_starts, np.arange(14))


def test_errors():
    with pytest.raises(TrackTooShort):
        dominant_au_sequence(_track(np.ones((30, 17))))
    with pytest.raises(DataError):
        _track(-np.ones((30, 17)))


def _brute(x, w, step):
    out = []
    for s in range(0, len(x) - w + 1, step):
        win = x[s:s + w]
        m = win.mean()
        out.append([int(win[:, a].max() > m + TIE_RTOL * abs(m)) for a in range(17)])
    return np.array(out)


@given(arrays(float, (70, 17), elements=st.floats(0, 5)), st.floats(0.01, 100))
def test_matches_rule_and_scale_invariance(x, lam):
    seq = dominant_au_sequence(_track(x, fps=10), 2.0, 1.0)
    np.testing.assert_array_equal(seq.dominance, _brute(x, 20, 10))
    scaled = dominant_au_sequence(_track(x * lam, fps=10), 2.0, 1.0)
    np.testing.assert_array_equal(scaled.dominance, seq.dominance)


@given(arrays(float, (20, 17), elements=st.floats(0, 5)))
def test_some_au_dominant_unless_constant(x):
    seq = dominant_au_sequence(_track(x, fps=10), 2.0, 1.0)
    if np.ptp(x) > 0:
        assert seq.dominance[0].sum() >= 1
    else:
        assert seq.dominance[0].sum() == 0


def test_transformer():
    tr = DominantAUTransformer()
    out = tr.fit_transform([_track(np.random.default_rng(1).random((90, 17)))])
    assert len(out[0]) == 2
