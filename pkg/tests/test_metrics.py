"""Agreement-index and knot-frequency checks against independent oracles."""

import numpy as np
import pytest

import oracles
from plfc.errors import InputError
from plfc.metrics import ari, changepoint_frequencies


def test_hand_computed_six_item_example():
    # contingency table {2,1 / 0,1,2}: num 24, den 99
    assert ari([1, 1, 1, 2, 2, 2], [1, 1, 2, 2, 3, 3]) == 8.0 / 33.0
    assert ari([1, 1, 1, 2, 2, 2], [1, 1, 2, 2, 3, 3]) == 0.24242424242424243


def test_identity_and_label_permutation_invariance():
    rng = np.random.default_rng(61)
    labels = rng.integers(1, 5, 30)
    assert ari(labels, labels) == 1.0
    renamed = np.choose(labels - 1, [7, 3, 9, 1])
    assert ari(labels, renamed) == 1.0
    strings = np.array(["abcd"[v - 1] for v in labels])
    assert ari(labels, strings) == 1.0


def test_symmetry():
    rng = np.random.default_rng(62)
    for _ in range(5):
        p = rng.integers(1, 4, 25)
        q = rng.integers(1, 6, 25)
        assert ari(p, q) == ari(q, p)


def test_matches_pair_counting_and_contingency_oracles():
    rng = np.random.default_rng(63)
    for _ in range(10):
        n = int(rng.integers(5, 40))
        p = rng.integers(1, 5, n)
        q = rng.integers(1, 4, n)
        ours = ari(p, q)
        assert ours == pytest.approx(oracles.ari_pairs(p, q), abs=1e-12)
        assert ours == pytest.approx(oracles.ari_contingency(p.tolist(), q.tolist()), abs=1e-12)


def test_degenerate_partitions():
    # both all-singletons and both one-block: zero denominator, perfect agreement
    assert ari([1, 2, 3, 4], [4, 3, 2, 1]) == 1.0
    assert ari([1, 1, 1, 1], [2, 2, 2, 2]) == 1.0
    # one block against all singletons: chance-level agreement
    assert ari([1, 1, 1, 1], [1, 2, 3, 4]) == 0.0


def test_ari_validation():
    with pytest.raises(InputError):
        ari([1, 2], [1, 2, 3])
    with pytest.raises(InputError):
        ari([1], [1])
    with pytest.raises(InputError):
        ari(np.ones((2, 2)), np.ones((2, 2)))


def test_random_partitions_score_near_zero():
    rng = np.random.default_rng(64)
    vals = []
    for _ in range(200):
        p = rng.integers(1, 5, 100)
        q = rng.integers(1, 5, 100)
        vals.append(ari(p, q))
    assert abs(float(np.mean(vals))) <= 0.05


def test_changepoint_frequencies_counts():
    grid = 10.0 * np.arange(51)
    reps = [(100.0, 200.0), (200.0,), (), (200.0, 490.0)]
    freqs = changepoint_frequencies(reps, grid)
    assert freqs.shape == (51,)
    lookup = dict(zip(grid, freqs))
    assert lookup[100.0] == 0.25
    assert lookup[200.0] == 0.75
    assert lookup[490.0] == 0.25
    assert freqs.sum() == pytest.approx(5 / 4)


def test_changepoint_frequencies_validation():
    grid = 10.0 * np.arange(51)
    with pytest.raises(InputError):
        changepoint_frequencies([], grid)
    with pytest.raises(InputError) as err:
        changepoint_frequencies([(100.0,), (105.0,)], grid)
    assert "replicate" in str(err.value)
