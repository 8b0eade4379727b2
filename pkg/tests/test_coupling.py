import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nitk.coupling import (
    EventSet,
    MarkovSource,
    blowup_corollary,
    blowup_set,
    causal_blowup_coupling,
    coupled_joint,
    maximal_coupling,
    sample_coupled,
    tilted_distribution,
    verify_blowup_bound,
)
from nitk.measures import LOG2E, tv_distance
from nitk.validation import ValidationError

UNIFORM1 = MarkovSource.iid([0.5, 0.5], 1)
UNIFORM2 = MarkovSource.iid([0.5, 0.5], 2)
A01 = EventSet.from_sequences([(0, 0), (0, 1)], 2, 2)


def test_tilted_examples():
    full = EventSet.full(2, 2)
    assert np.allclose(tilted_distribution(UNIFORM2, full).sequence_pmf(), UNIFORM2.sequence_pmf())
    pt = tilted_distribution(UNIFORM1, EventSet.from_sequences([(0,)], 2, 1))
    assert np.allclose(pt.sequence_pmf(), [1, 0])
    t = tilted_distribution(UNIFORM2, A01)
    assert np.allclose(t.kernels[0], [[1, 0]])
    assert np.allclose(t.kernels[1][0], [0.5, 0.5])


def test_tilted_zero_mass():
    src = MarkovSource.iid([1.0, 0.0], 1)
    with pytest.raises(ValidationError, match="P\\(A\\) = 0"):
        tilted_distribution(src, EventSet.from_sequences([(1,)], 2, 1))


def test_maximal_coupling_examples():
    J = maximal_coupling([0.3, 0.7], [0.3, 0.7]).table
    assert np.allclose(J, np.diag([0.3, 0.7]))
    J = maximal_coupling([0.5, 0.5], [1, 0]).table
    assert 1 - np.trace(J) == pytest.approx(0.5)
    J = maximal_coupling([0.7, 0.3], [0.4, 0.6]).table
    assert 1 - np.trace(J) == pytest.approx(0.3)
    assert np.trace(J) == pytest.approx(0.7)


def _expected_hamming(src, A):
    J = coupled_joint(src, causal_blowup_coupling(src, A))
    seqs = src.alphabet.all_sequences()
    D = (seqs[:, None, :] != seqs[None, :, :]).sum(axis=2)
    return float((J * D).sum()), J


def test_coupling_examples():
    ed, J = _expected_hamming(UNIFORM1, EventSet.from_sequences([(0,)], 2, 1))
    assert ed == pytest.approx(0.5)
    assert np.allclose(J.sum(axis=0), [1, 0])
    ed, _ = _expected_hamming(UNIFORM2, EventSet.full(2, 2))
    assert ed == 0.0
    ed, _ = _expected_hamming(UNIFORM2, A01)
    assert ed == pytest.approx(0.5)


def test_verify_examples():
    r = verify_blowup_bound(UNIFORM1, EventSet.from_sequences([(0,)], 2, 1))
    assert r.exact_expected_hamming == pytest.approx(0.5)
    assert r.bound == pytest.approx(math.sqrt(1 / (2 * LOG2E)), abs=1e-12)
    assert r.bound == pytest.approx(0.5887, abs=1e-4)
    r = verify_blowup_bound(UNIFORM2, A01)
    assert r.exact_expected_hamming == pytest.approx(0.5) and r.bound == pytest.approx(0.8326, abs=1e-4)
    r = verify_blowup_bound(UNIFORM2, EventSet.full(2, 2))
    assert r.exact_expected_hamming == 0.0 and r.bound == 0.0 and r.holds


def test_verify_cap_and_mc_mode():
    src = MarkovSource.iid([0.3, 0.7], 4)
    A = EventSet.hamming_ball((0, 0, 0, 0), 1, 2)
    with pytest.raises(ValidationError, match="cap"):
        verify_blowup_bound(src, A, cap=10)
    mc = verify_blowup_bound(src, A, samples=20000, seed=3)
    exact = verify_blowup_bound(src, A)
    assert mc.z_in_A
    assert mc.ci_low - 0.02 <= exact.exact_expected_hamming <= mc.ci_high + 0.02


def test_blowup_set_examples():
    A = EventSet.from_sequences([(0, 1, 1)], 2, 3)
    assert blowup_set(A, 0) == A
    assert len(blowup_set(EventSet.from_sequences([(0, 0, 0)], 2, 3), 3)) == 8
    ball = blowup_set(EventSet.from_sequences([(0, 0)], 2, 2), 1)
    assert sorted(ball.sequences()) == [(0, 0), (0, 1), (1, 0)]
    with pytest.raises(ValidationError):
        blowup_set(A, -1)


def test_corollary_exact():
    src = MarkovSource.iid([0.5, 0.5], 3)
    c = blowup_corollary(src, EventSet.from_sequences([(0, 0, 0)], 2, 3), 2, exact=True)
    assert c.prob_blown_up == 7 / 8 and c.holds


def test_mismatched_spaces():
    with pytest.raises(ValidationError):
        verify_blowup_bound(UNIFORM1, A01)


sources = st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.floats(0.05, 0.95), min_size=2 ** n - 1, max_size=2 ** n - 1),
))


def _source(n, ps):
    kernels = []
    i = 0
    for t in range(n):
        rows = [[ps[i + r], 1 - ps[i + r]] for r in range(2 ** t)]
        i += 2 ** t
        kernels.append(np.array(rows))
    return MarkovSource(n, 2, tuple(kernels))


@given(sources, st.data())
def test_z_has_tilted_law_and_bound(spec, data):
    n, ps = spec
    src = _source(n, ps)
    ranks = data.draw(st.sets(st.integers(0, 2 ** n - 1), min_size=1))
    A = EventSet.from_ranks(ranks, 2, n)
    ed, J = _expected_hamming(src, A)
    tilt = np.where(A.membership, src.sequence_pmf(), 0) / src.probability(A)
    # Y_t is drawn from the source kernel at the Z prefix, so the last letter of Y
    # given Z^{n-1} follows the source kernel row of that prefix
    b = 2
    J4 = J.reshape(b ** (n - 1), b, b ** (n - 1), b)
    yz_last = J4.sum(axis=(0, 3))  # (y_n, z^{n-1})
    mass = yz_last.sum(axis=0)
    for r in np.flatnonzero(mass > 1e-12):
        assert np.allclose(yz_last[:, r] / mass[r], src.kernels[n - 1][r], atol=1e-9)
    assert tv_distance(J.sum(axis=0), tilt) <= 1e-9
    assert np.all(J.sum(axis=0)[~A.membership] == 0)
    r = verify_blowup_bound(src, A)
    assert r.exact_expected_hamming == pytest.approx(ed)
    assert r.tv_route_expected_hamming == pytest.approx(ed, abs=1e-9)
    assert ed <= r.bound + 1e-12


@given(st.integers(1, 3), st.data())
def test_blowup_monotone(n, data):
    ranks = data.draw(st.sets(st.integers(0, 2 ** n - 1), min_size=1))
    A = EventSet.from_ranks(ranks, 2, n)
    prev = A
    for ell in range(1, n + 1):
        cur = blowup_set(A, ell)
        assert np.all(cur.membership >= prev.membership)
        prev = cur
    assert len(prev) == 2 ** n


def test_iid_source_keeps_y_marginal():
    src = MarkovSource.iid([0.3, 0.7], 3)
    _, J = _expected_hamming(src, EventSet.hamming_ball((0, 0, 0), 1, 2))
    assert np.allclose(J.sum(axis=1), src.sequence_pmf(), atol=1e-12)


def test_sampler_respects_support():
    src = MarkovSource.markov_chain([0.6, 0.4], [[0.8, 0.2], [0.3, 0.7]], 3)
    A = EventSet.hamming_ball((1, 1, 1), 1, 2)
    y, z = sample_coupled(src, causal_blowup_coupling(src, A), 2000, np.random.default_rng(0))
    assert all(tuple(row) in A for row in z)
