import math
from itertools import product

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nitk.core import JointDistribution
from nitk.measures import (
    binary_entropy,
    channel_mutual_information,
    composition_grid,
    conditional_kl,
    conditional_mutual_information,
    entropy,
    hamming_distance,
    kl_divergence,
    mutual_information,
    pinsker_tv_bound,
    reverse_markov_bound,
    SequenceAlphabet,
    tv_distance,
)
from nitk.validation import ValidationError


def pmf(size, min_size=2):
    return st.lists(st.floats(0.0, 1.0), min_size=min_size, max_size=size).filter(
        lambda v: sum(v) > 1e-3
    ).map(lambda v: np.asarray(v) / sum(v))


def pmf_pair(max_size=5):
    return st.integers(2, max_size).flatmap(
        lambda k: st.tuples(pmf(k, k), pmf(k, k))
    )


def test_kl_examples():
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
    assert kl_divergence([0.5, 0.5], [1, 0]) == math.inf


def test_kl_length_mismatch():
    with pytest.raises(ValidationError):
        kl_divergence([0.5, 0.5], [1 / 3] * 3)


def test_conditional_kl_examples():
    P = [[1, 0], [0, 1]]
    Q = [[0.5, 0.5], [0.5, 0.5]]
    assert conditional_kl(P, P, [0.5, 0.5]) == 0.0
    assert conditional_kl(P, Q, [0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
    R = [[0.2, 0.8], [0.6, 0.4]]
    assert conditional_kl(R, Q, [0, 1]) == pytest.approx(kl_divergence([0.6, 0.4], [0.5, 0.5]))


def test_tv_examples():
    assert tv_distance([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert tv_distance([1, 0], [0, 1]) == 1.0
    assert tv_distance([0.7, 0.3], [0.4, 0.6]) == pytest.approx(0.3, abs=1e-12)


def test_mutual_information_examples():
    assert mutual_information(np.outer([0.3, 0.7], [0.6, 0.4])) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information([[0.5, 0], [0, 0.5]]) == pytest.approx(1.0, abs=1e-12)
    W = [[0.89, 0.11], [0.11, 0.89]]
    assert channel_mutual_information([0.5, 0.5], W) == pytest.approx(1 - binary_entropy(0.11), abs=1e-12)
    assert 1 - binary_entropy(0.11) == pytest.approx(0.5001, abs=1e-4)


def test_conditional_mutual_information_xor():
    # X, Y independent bits, Z = X xor Y: I(X;Y) = 0 but I(X;Y|Z) = 1
    t = np.zeros((2, 2, 2))
    for x, y in product(range(2), repeat=2):
        t[x, y, x ^ y] = 0.25
    assert conditional_mutual_information(t, [0], [1]) == pytest.approx(0.0, abs=1e-12)
    assert conditional_mutual_information(t, [0], [1], [2]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        conditional_mutual_information(t, [0], [0])


def test_hamming_examples():
    assert hamming_distance((1, 0, 1), (1, 0, 1)) == 0
    assert hamming_distance((0, 0, 0), (1, 1, 1)) == 3
    assert hamming_distance((0, 1, 0, 1), (0, 1, 1, 1)) == 1
    with pytest.raises(ValidationError, match="length"):
        hamming_distance((0, 1), (0, 1, 1))


def test_reverse_markov_examples():
    assert reverse_markov_bound(0.5, 1.0, 0.25) == pytest.approx(1 / 3)
    assert reverse_markov_bound(2.0, 2.0, 0.7) == 1.0
    assert reverse_markov_bound(0.4, 1.0, 0.4) == 0.0
    with pytest.raises(ValidationError):
        reverse_markov_bound(0.5, 1.0, 1.0)


def test_entropy_and_grid():
    assert entropy([0.25] * 4) == pytest.approx(2.0)
    g = composition_grid(3, 3)
    assert len(g) == 10 and np.all(g.sum(axis=1) == 3)


def test_sequence_alphabet_roundtrip():
    a = SequenceAlphabet(3, 4)
    seqs = a.all_sequences()
    assert seqs.shape == (81, 4)
    assert all(a.rank(seqs[r]) == r for r in range(81))
    assert a.unrank(5) == (0, 0, 1, 2)


@given(pmf_pair())
def test_kl_nonnegative(pq):
    p, q = pq
    assert kl_divergence(p, q) >= 0.0


@given(pmf_pair())
def test_pinsker(pq):
    p, q = pq
    d = kl_divergence(p, q)
    assume(math.isfinite(d))
    assert tv_distance(p, q) <= pinsker_tv_bound(d) + 1e-9


@given(st.integers(2, 4), st.integers(2, 4), st.data())
def test_mi_relabel_invariant(a, b, data):
    t = np.asarray(data.draw(pmf(a * b, a * b))).reshape(a, b)
    px = data.draw(st.permutations(range(a)))
    py = data.draw(st.permutations(range(b)))
    base = mutual_information(JointDistribution(t))
    assert mutual_information(t[np.ix_(px, py)]) == pytest.approx(base, abs=1e-9)
    assert base <= math.log2(min(a, b)) + 1e-9


@given(st.lists(st.integers(0, 6), min_size=1, max_size=8), st.data())
def test_reverse_markov_by_enumeration(support, data):
    # X uniform on a small integer multiset, x_max = 6
    xs = np.asarray(support, dtype=float)
    mean = xs.mean()
    tau = data.draw(st.floats(0.0, min(mean, 5.999)))
    assume(tau <= mean)
    assert np.mean(xs > tau) >= reverse_markov_bound(mean, 6.0, tau) - 1e-12
