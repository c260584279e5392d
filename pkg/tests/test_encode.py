import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from spikeopt.encode import (
    EncodingWindow,
    isi_decode,
    isi_encode,
    poisson_encode,
    rate_decode,
    rate_encode,
    ttfs_decode,
    ttfs_encode,
)


def test_rate_examples():
    w = EncodingWindow(10)
    assert len(rate_encode(0.8, w)) == 8
    assert rate_encode(0.0, w) == []
    assert rate_decode(list(range(10)), w) == 1.0
    assert rate_decode([], w) == 0.0


def test_rate_roundtrip_random():
    w = EncodingWindow(50)
    for v in np.random.default_rng(0).random(1000):
        train = rate_encode(v, w)
        assert train == sorted(set(train))
        assert abs(rate_decode(train, w) - v) <= 1 / (2 * w.length) + 1e-12


@pytest.mark.parametrize("bad", [-0.1, 1.1])
def test_out_of_range(bad):
    w = EncodingWindow(10)
    for enc in (rate_encode, ttfs_encode, isi_encode):
        with pytest.raises(ValueError):
            enc(bad, w)
    with pytest.raises(ValueError):
        poisson_encode(bad, w, np.random.default_rng(0))


def test_decode_rejects_outside_window():
    with pytest.raises(ValueError):
        rate_decode([10], EncodingWindow(10))


def test_ttfs_boundaries_and_monotone():
    w = EncodingWindow(100)
    assert ttfs_encode(1.0, w) == [0]
    assert ttfs_encode(0.0, w) == [99]
    assert ttfs_encode(0.0, w, silent_zero=True) == []
    levels = w.levels()
    ticks = [ttfs_encode(v, w)[0] for v in levels]
    assert all(a >= b for a, b in zip(ticks, ticks[1:]))
    for v in levels:
        assert abs(ttfs_decode(ttfs_encode(v, w), w) - v) <= 1 / (2 * (w.length - 1)) + 1e-12


@given(st.integers(2, 300), st.data())
def test_ttfs_order_reversal(length, data):
    w = EncodingWindow(length, data.draw(st.integers(1, length)))
    levels = w.levels()
    ticks = np.array([ttfs_encode(v, w)[0] for v in levels])
    assert np.all(np.diff(ticks) <= 0)


def test_isi_examples_and_roundtrip():
    w = EncodingWindow(10)
    assert isi_encode(0.0, w) == [0, 1]
    assert isi_encode(1.0, w) == [0, 9]
    with pytest.raises(ValueError):
        isi_encode(0.5, EncodingWindow(2))
    for length in (3, 10, 77):
        w = EncodingWindow(length)
        for v in np.linspace(0, 1, 501):
            assert abs(isi_decode(isi_encode(v, w), w) - v) <= 1 / (2 * (length - 2)) + 1e-12


def test_poisson():
    w = EncodingWindow(1000)
    rng = np.random.default_rng(1)
    assert poisson_encode(1.0, w, rng) == list(range(1000))
    assert poisson_encode(0.0, w, rng) == []
    big = EncodingWindow(10 ** 5)
    train = poisson_encode(0.3, big, rng)
    assert abs(len(train) / big.length - 0.3) <= 0.01


def test_poisson_count_chi_square():
    # spike counts over many short windows follow Binomial(T, p)
    t, p, reps = 20, 0.3, 5000
    rng = np.random.default_rng(2)
    w = EncodingWindow(t)
    counts = np.array([len(poisson_encode(p, w, rng)) for _ in range(reps)])
    observed = np.bincount(counts, minlength=t + 1)
    expected = stats.binom.pmf(np.arange(t + 1), t, p) * reps
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    exp *= obs.sum() / exp.sum()
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_window_validation():
    with pytest.raises(ValueError):
        EncodingWindow(0)
    with pytest.raises(ValueError):
        EncodingWindow(5, 6)
