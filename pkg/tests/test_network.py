import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from vcinet.network import LOST, DelayModel, sample_delay, sample_delays, truncated_weights


@pytest.mark.parametrize("pmf, loss, n_seq, expected", [
    ([1.0], 0.0, 1, [1.0, 0.0, 0.0]),
    ([0.6, 0.4], 0.5, 1, [0.3, 0.2, 0.5]),
    ([0.0, 0.0, 1.0], 0.0, 1, [0.0, 0.0, 1.0]),
    ([0.5, 0.25, 0.25], 0.0, 3, [0.5, 0.25, 0.25, 0.0, 0.0]),
])
def test_truncated_weights(pmf, loss, n_seq, expected):
    assert_allclose(truncated_weights(DelayModel(pmf, loss), n_seq), expected, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 6), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_truncated_weights_simplex_and_monotone(k, n_seq, loss, seed):
    pmf = np.random.default_rng(seed).dirichlet(np.ones(k))
    q = truncated_weights(DelayModel(pmf, loss), n_seq)
    assert q.size == n_seq + 2
    assert np.all(q >= 0)
    assert q.sum() == pytest.approx(1.0, abs=1e-12)
    worse = truncated_weights(DelayModel(pmf, min(1.0, loss + 0.1)), n_seq)
    assert worse[-1] >= q[-1] - 1e-12


def test_invalid_models():
    with pytest.raises(ValueError):
        DelayModel([0.5, 0.4])
    with pytest.raises(ValueError):
        DelayModel([1.0], loss_prob=1.5)
    with pytest.raises(ValueError):
        DelayModel([1.2, -0.2])


class TestSampling:
    def test_perfect(self):
        rng = np.random.default_rng(0)
        assert all(sample_delay(DelayModel([1.0]), rng) == 0 for _ in range(1000))

    def test_all_lost(self):
        rng = np.random.default_rng(1)
        assert all(sample_delay(DelayModel([1.0], 1.0), rng) is LOST for _ in range(1000))

    def test_frequency(self):
        rng = np.random.default_rng(2)
        draws = [sample_delay(DelayModel([0.5, 0.5]), rng) for _ in range(100_000)]
        assert abs(np.mean(np.array(draws) == 0) - 0.5) < 0.005

    def test_zero_mass_never_drawn(self):
        rng = np.random.default_rng(3)
        draws = {sample_delay(DelayModel([0.0, 0.0, 1.0]), rng) for _ in range(1000)}
        assert draws == {2}

    def test_deterministic(self):
        model = DelayModel([0.2, 0.3, 0.5], 0.1)
        a = [sample_delay(model, np.random.default_rng(4)) for _ in range(50)]
        b = [sample_delay(model, np.random.default_rng(4)) for _ in range(50)]
        assert a == b

    def test_vectorized_distribution(self):
        model = DelayModel([0.2, 0.3, 0.5], 0.25)
        draws = sample_delays(model, np.random.default_rng(5), 200_000)
        freq = [np.mean(draws == d) for d in (-1, 0, 1, 2)]
        assert_allclose(freq, [0.25, 0.15, 0.225, 0.375], atol=0.005)

    def test_loss_stream(self):
        model = DelayModel([1.0], 0.3)
        rng = np.random.default_rng(6)
        lost = np.mean([sample_delay(model, rng) is LOST for _ in range(50_000)])
        assert abs(lost - 0.3) < 0.01
        assert_array_equal(sample_delays(DelayModel([1.0], 1.0), rng, 5), -1)
