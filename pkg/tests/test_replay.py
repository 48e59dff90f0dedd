import numpy as np
import pytest

from flexrank.replay import PRIORITY_EPS, PrioritizedBuffer


def test_fifo_eviction():
    buf = PrioritizedBuffer(capacity=3)
    for i in range(5):
        buf.add(i)
    assert len(buf) == 3
    assert sorted(buf.items()) == [2, 3, 4]


def test_underfilled_returns_none():
    buf = PrioritizedBuffer(capacity=10)
    buf.add("t")
    assert buf.sample(2, np.random.default_rng(0), beta=1.0) is None


def test_probabilities_proportional():
    buf = PrioritizedBuffer(capacity=4)
    buf.add("a")
    buf.add("b")
    buf.update_priorities(np.array([0, 1]), np.array([1.0 - PRIORITY_EPS, 3.0 - PRIORITY_EPS]))
    assert np.allclose(buf.probabilities(), [0.25, 0.75])


def test_importance_weight_example():
    # |D| = 2, P(i) = 0.25, beta = 1 -> weight 2.0
    buf = PrioritizedBuffer(capacity=4)
    buf.add("a")
    buf.add("b")
    buf.update_priorities(np.array([0, 1]), np.array([1.0 - PRIORITY_EPS, 3.0 - PRIORITY_EPS]))
    rng = np.random.default_rng(1)
    all_idx, all_w = [], []
    for _ in range(50):
        idx, items, weights = buf.sample(2, rng, beta=1.0)
        all_idx.append(idx)
        all_w.append(weights)
    idx = np.concatenate(all_idx)
    weights = np.concatenate(all_w)
    low = idx == 0
    assert low.any() and (~low).any()
    assert np.allclose(weights[low], 2.0)
    assert np.allclose(weights[~low], 1.0 / (2 * 0.75))


def test_probabilities_sum_to_one():
    buf = PrioritizedBuffer(capacity=50)
    rng = np.random.default_rng(2)
    for i in range(50):
        buf.add(i)
    buf.update_priorities(np.arange(50), rng.uniform(0.1, 5.0, size=50))
    assert buf.probabilities().sum() == pytest.approx(1.0)


def test_uniform_priorities_sample_uniformly():
    # chi-square goodness of fit over 1e5 draws at the 1% level (df=9 -> 21.67)
    n = 10
    buf = PrioritizedBuffer(capacity=n)
    for i in range(n):
        buf.add(i)
    rng = np.random.default_rng(3)
    counts = np.zeros(n)
    draws = 100_000
    for _ in range(draws // n):
        idx, _, _ = buf.sample(n, rng, beta=1.0)
        counts += np.bincount(idx, minlength=n)
    expected = draws / n
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 21.666


def test_new_transitions_get_max_priority():
    buf = PrioritizedBuffer(capacity=5)
    buf.add("a")
    buf.update_priorities(np.array([0]), np.array([4.0]))
    buf.add("b")
    pri = buf.priorities()
    assert pri[1] == pytest.approx(pri[0])


def test_priorities_strictly_positive():
    buf = PrioritizedBuffer(capacity=5)
    buf.add("a")
    buf.update_priorities(np.array([0]), np.array([0.0]))
    assert np.all(buf.priorities() > 0.0)
