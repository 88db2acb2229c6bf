import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kineme.exceptions import EmptyCorpus, SymbolOutOfRange
from kineme.predictors.hmm import DiscreteHMM, HMMClassifier, hmm_classify, hmm_fit, hmm_loglik


def random_model(g, n, K):
    def stoch(shape):
        m = g.random(shape) + 0.05
        return m / m.sum(axis=-1, keepdims=True)

    return DiscreteHMM(stoch(n), stoch((n, n)), stoch((n, K)))


def enumerate_loglik(model, seq):
    obs = np.asarray(seq) - 1
    total = 0.0
    for path in itertools.product(range(model.n_states), repeat=len(obs)):
        p = model.startprob[path[0]] * model.emissionprob[path[0], obs[0]]
        for t in range(1, len(obs)):
            p *= model.transmat[path[t - 1], path[t]] * model.emissionprob[path[t], obs[t]]
        total += p
    return np.log(total)


def sample(model, T, g):
    s = g.choice(model.n_states, p=model.startprob)
    out = []
    for _ in range(T):
        out.append(g.choice(model.n_symbols, p=model.emissionprob[s]) + 1)
        s = g.choice(model.n_states, p=model.transmat[s])
    return np.array(out)


@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(1, 6))
def test_forward_equals_enumeration(seed, n, T):
    g = np.random.default_rng(seed)
    m = random_model(g, n, 4)
    seq = g.integers(1, 5, T)
    assert hmm_loglik(m, seq) == pytest.approx(enumerate_loglik(m, seq), abs=1e-10)


def test_length2_two_states(rng):
    m = random_model(rng, 2, 3)
    seq = np.array([1, 3])
    assert abs(hmm_loglik(m, seq) - enumerate_loglik(m, seq)) <= 1e-12


def test_deterministic_model_loglik_zero():
    m = DiscreteHMM(np.array([1.0, 0.0]), np.array([[0.0, 1.0], [1.0, 0.0]]),
                    np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert hmm_loglik(m, [1, 2, 1, 2]) == 0.0


def test_impossible_symbol_is_neg_inf():
    m = DiscreteHMM(np.array([0.5, 0.5]), np.full((2, 2), 0.5), np.array([[0.5, 0.5, 0.0], [1.0, 0.0, 0.0]]))
    assert hmm_loglik(m, [1, 3]) == float("-inf")


def test_single_state_is_empirical_frequency(rng):
    seqs = [rng.integers(1, 6, rng.integers(3, 12)) for _ in range(20)]
    m = hmm_fit(seqs, n_states=1, n_symbols=5)
    freq = np.bincount(np.concatenate(seqs) - 1, minlength=5) / sum(len(s) for s in seqs)
    np.testing.assert_allclose(m.emissionprob[0], freq, atol=1e-9)


def test_single_symbol_corpus():
    m = hmm_fit([np.full(10, 3)] * 5, n_states=2, n_symbols=4)
    assert np.all(m.emissionprob[:, 2] >= 0.999)


@given(st.integers(0, 2**31 - 1))
def test_baum_welch_monotone_and_stochastic(seed):
    g = np.random.default_rng(seed)
    seqs = [g.integers(1, 5, g.integers(2, 15)) for _ in range(8)]
    m = hmm_fit(seqs, n_states=3, n_symbols=4, max_iters=30, rel_tol=0, seed=seed)
    tr = np.array(m.loglik_trace)
    assert np.all(np.diff(tr) >= -1e-8 * np.abs(tr[:-1]).clip(1))
    for mat in (m.startprob[None], m.transmat, m.emissionprob):
        np.testing.assert_allclose(mat.sum(axis=1), 1.0, atol=1e-9)
        assert mat.min() >= 0


def test_refit_dominates_generator():
    g = np.random.default_rng(4)
    gen = DiscreteHMM(np.array([0.6, 0.4]), np.array([[0.9, 0.1], [0.2, 0.8]]),
                      np.array([[0.7, 0.2, 0.1, 0.0], [0.0, 0.1, 0.2, 0.7]]))
    seqs = [sample(gen, 30, g) for _ in range(40)]
    fit = hmm_fit(seqs, n_states=2, n_symbols=4, max_iters=200, seed=0)
    ll_fit = sum(hmm_loglik(fit, s) for s in seqs)
    ll_gen = sum(hmm_loglik(gen, s) for s in seqs)
    assert ll_fit >= ll_gen - 0.01 * abs(ll_gen)


def test_errors():
    with pytest.raises(EmptyCorpus):
        hmm_fit([])
    with pytest.raises(SymbolOutOfRange):
        hmm_fit([[0, 1]], n_symbols=3)
    with pytest.raises(SymbolOutOfRange):
        hmm_fit([[1, 5]], n_symbols=3)


def test_classify_rules():
    m = random_model(np.random.default_rng(0), 2, 3)
    assert hmm_classify((m, m), [1, 2, 3]) == 0
    a = DiscreteHMM(np.ones(1), np.ones((1, 1)), np.array([[0.5, 0.5, 0.0, 0.0]]))
    b = DiscreteHMM(np.ones(1), np.ones((1, 1)), np.array([[0.0, 0.0, 0.5, 0.5]]))
    assert hmm_classify((a, b), [1, 2, 1]) == 0
    assert hmm_classify((a, b), [3, 4]) == 1


def test_classifier_two_class():
    g = np.random.default_rng(1)
    A = DiscreteHMM(np.array([1.0, 0.0]), np.array([[0.8, 0.2], [0.2, 0.8]]),
                    np.array([[0.6, 0.3, 0.05, 0.05], [0.3, 0.6, 0.05, 0.05]]))
    B = DiscreteHMM(np.array([1.0, 0.0]), np.array([[0.8, 0.2], [0.2, 0.8]]),
                    np.array([[0.05, 0.05, 0.6, 0.3], [0.05, 0.05, 0.3, 0.6]]))
    X = [sample(A, 20, g) for _ in range(60)] + [sample(B, 20, g) for _ in range(60)]
    y = np.r_[np.zeros(60), np.ones(60)]
    clf = HMMClassifier(n_states=2, n_symbols=4).fit(X, y)
    Xt = [sample(A, 20, g) for _ in range(25)] + [sample(B, 20, g) for _ in range(25)]
    yt = np.r_[np.zeros(25), np.ones(25)]
    assert clf.score(Xt, yt) >= 0.9
    proba = clf.predict_proba(Xt)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    again = HMMClassifier.from_dict(clf.to_dict())
    np.testing.assert_array_equal(again.predict(Xt), clf.predict(Xt))
