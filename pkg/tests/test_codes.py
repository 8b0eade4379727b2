import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nitk.acceptance import (
    lemma1_family,
    lemma1_network,
    noiseless_stacked_instance,
    oracle_instance,
    relay_pair,
    repetition_instance,
)
from nitk.codes import (
    MDSCode,
    binning_coordination,
    binning_eta,
    binning_k,
    brute_force_min_error,
    exact_error_probability,
    gamma_n,
    good_message_set,
    lemma1_bound,
    lemma1_transform,
    mds_formula,
    mds_pipeline,
    monte_carlo_error_probability,
    search_best_code,
    stacked_correction_sim,
)
from nitk.codes.binning import SyntheticGamma, feasibility_constant
from nitk.codes.gf import GF2m
from nitk.codes.stacked import e1_bound, e1_bound_layers, phase_bits
from nitk.codes.evaluation import ErrorReport
from nitk.core import Code, ModifiedCode, Network, modified_network
from nitk.validation import ValidationError


def identity_code():
    net = Network.point_to_point(np.eye(2))
    return net, Code(1, (2, 1), ((np.array([[0], [1]]),), (np.zeros((1, 1), dtype=np.int64),)), {(0, 1): np.array([[0, 1]])})


def bsc_code(p):
    net = Network.point_to_point([[1 - p, p], [p, 1 - p]])
    return net, Code(1, (2, 1), ((np.array([[0], [1]]),), (np.zeros((1, 1), dtype=np.int64),)), {(0, 1): np.array([[0, 1]])})


# evaluation ----------------------------------------------------------------

def test_exact_error_examples():
    net, code = identity_code()
    assert exact_error_probability(net, code).error_prob == 0.0
    net, code = bsc_code(0.11)
    rep = exact_error_probability(net, code)
    assert rep.error_prob == pytest.approx(0.11, abs=1e-12)
    assert np.allclose(rep.per_message_success, [0.89, 0.89])


def test_monte_carlo_matches_exact():
    net, code = bsc_code(0.11)
    mc = monte_carlo_error_probability(net, code, 20000, seed=5)
    assert mc.ci[0] <= 0.11 <= mc.ci[1]
    again = monte_carlo_error_probability(net, code, 20000, seed=5)
    assert again.error_prob == mc.error_prob
    with pytest.raises(ValidationError):
        monte_carlo_error_probability(net, code, 100, seed=None)


def test_repetition_code_exact():
    p = 0.1
    net, code = repetition_instance(p)
    want = 3 * p ** 2 * (1 - p) + p ** 3
    assert exact_error_probability(net, code).error_prob == pytest.approx(want, abs=1e-12)


def test_good_message_set_examples():
    rep = ErrorReport(0.5, np.array([1.0, 1.0, 0.0, 0.0]), (4,))
    g = good_message_set(rep, 0.5)
    assert g.size == 2 and g.members == ((0,), (1,))
    assert g.certificate_holds
    with pytest.raises(ValidationError):
        good_message_set(ErrorReport(0.1, None, (2,), exact=False), 0.1)


@settings(max_examples=30)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=16))
def test_good_message_set_certificate(pc):
    pc = np.asarray(pc)
    eps = 1.0 - pc.mean()
    g = good_message_set(ErrorReport(float(eps), pc, (len(pc),)), float(min(max(eps, 0.0), 1.0)))
    assert g.certificate_holds


# search and oracle ----------------------------------------------------------

def test_search_noiseless_three_messages():
    net = Network.point_to_point(np.eye(2))
    code, rep = search_best_code(net, 1, (3, 1))
    assert rep.error_prob == pytest.approx(1 / 3)
    assert exact_error_probability(net, code).error_prob == pytest.approx(1 / 3)


def test_search_budget_guard():
    net = Network.point_to_point(np.eye(2))
    with pytest.raises(ValidationError, match="budget"):
        search_best_code(net, 3, (8, 1), budget=10)
    code, rep = search_best_code(net, 3, (8, 1), mode="random", seed=1, restarts=3)
    assert 0.0 <= rep.error_prob <= 1.0


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_oracle_matches_search(seed):
    net, n, sizes = oracle_instance(seed)
    exact = brute_force_min_error(net, n, sizes)
    assert isinstance(exact, Fraction)
    _, rep = search_best_code(net, n, sizes, budget=2 ** 16)
    assert rep.error_prob == pytest.approx(float(exact), abs=1e-12)


# lemma 1 -------------------------------------------------------------------

def test_lemma1_bound_example():
    assert lemma1_bound(0.2, 2) == pytest.approx(0.8)
    assert lemma1_bound(0.3, 0) == pytest.approx(0.3)


def test_lemma1_zero_bits_unchanged():
    net = lemma1_network()
    enc0 = (np.array([[0], [1], [0], [1]]),)
    enc1 = (np.zeros((1, 1), dtype=np.int64),)
    base = Code(1, (4, 1), (enc0, enc1), {(0, 1): np.array([[0, 1]])})
    mcode = ModifiedCode.from_base_code(modified_network(net, {0, 1}, 0, 1), base)
    res = lemma1_transform(net, {0, 1}, 0, mcode)
    assert res.modified_error == pytest.approx(exact_error_probability(net, base).error_prob)
    assert res.report.error_prob == pytest.approx(0.5)
    assert res.bound == pytest.approx(res.modified_error)


def test_lemma1_family_sample():
    net = lemma1_network()
    for mcode in lemma1_family(limit=600):
        res = lemma1_transform(net, {0, 1}, 1, mcode)
        assert res.within_bound
        assert res.report.error_prob == pytest.approx(min(res.errors_by_x))


# binning -------------------------------------------------------------------

def test_binning_formulas():
    k = binning_k(2, 1 / 4, 0.5)
    val = 2 + math.log2(math.log(32)) + 1
    assert k == math.ceil(val)
    assert binning_eta(2, 0.25) == pytest.approx(18 + 6 * math.log2(math.log(32)))
    assert feasibility_constant(1) == pytest.approx(4.0)
    assert all(feasibility_constant(j) <= 4.0 for j in range(1, 40))


def test_binning_full_gamma_never_misses():
    rep = binning_coordination(1.0, (2 ** 10, 2 ** 10), 0.1, seed=0, trials=50)
    assert rep.q_estimates == (0.0, 0.0, 0.0)


def test_binning_regime_refused():
    with pytest.raises(ValidationError, match="2k"):
        binning_coordination(0.5, (16, 16), 0.1, seed=0)
    with pytest.raises(ValidationError, match="power of two"):
        binning_coordination(0.5, (24,), 0.1, seed=0, k=1)


def test_binning_sparse_gamma_misses():
    rep = binning_coordination(0.05, (16, 16), 0.1, seed=2, trials=300, k=1)
    assert min(rep.q_estimates) > 0.5


def test_binning_spec_defaults_within_tolerance():
    rep = binning_coordination(0.5, (2 ** 12, 2 ** 12), 0.25, seed=7, trials=100)
    assert rep.k == binning_k(2, 0.25, 0.5)
    assert rep.within_tolerance and rep.feasibility_holds


@settings(max_examples=20)
@given(st.integers(1, 2 ** 12), st.floats(0.0, 1.0), st.integers(0, 2 ** 31))
def test_synthetic_gamma_exact_count(size, density, seed):
    g = SyntheticGamma(size, density, seed)
    assert int(g.contains(np.arange(size)).sum()) == g.count
    assert g.count == min(size, math.ceil(density * size - 1e-9))


# MDS -----------------------------------------------------------------------

def test_gf_field_axioms():
    f = GF2m(4)
    for a in range(1, 16):
        assert f.mul(a, f.inv(a)) == 1


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_mds_minimum_distance(N):
    assert MDSCode(N).minimum_distance() == 3


def test_mds_distance_guard():
    with pytest.raises(ValidationError, match="enumerate"):
        MDSCode(12).minimum_distance()


@pytest.mark.parametrize("N", [3, 5, 7, 12, 16])
def test_mds_corrects_single_errors(N):
    code = MDSCode(N)
    msgs = np.random.default_rng(N).integers(0, code.gf.q, (50, code.K))
    words = code.encode(msgs)
    assert np.all(code.syndromes(words) == 0)
    # flip one symbol in every word
    err = words.copy()
    err[np.arange(50), np.arange(50) % N] ^= 1
    dec, ok = code.decode(err)
    assert ok.all() and np.array_equal(dec, msgs)


def test_mds_small_n_rejected():
    with pytest.raises(ValidationError, match="no MDS code"):
        MDSCode(2)


def test_mds_formula_and_pipeline():
    assert mds_formula(0.0, 5) == 0.0
    assert mds_formula(0.1, 3) == pytest.approx(1 - 0.9 ** 3 - 3 * 0.1 * 0.9 ** 2)
    res = mds_pipeline(0.1, 5, seed=3, trials=20000)
    assert res.within_3_sigma


# stacked -------------------------------------------------------------------

def test_stacked_helpers():
    g = gamma_n(0.0, 16)
    assert g == pytest.approx((2 / 16) ** 0.25)
    assert phase_bits(0, 4, 2) == 1
    assert phase_bits(2, 4, 2) == 2 * (3 + 1) + 1
    assert e1_bound_layers(0.5, 1.0, 4, 2) == pytest.approx(0.5 * 4 + 0.5)
    assert e1_bound(0.5, 1.0, 2) == pytest.approx(0.5 * (2 + 1 + 3))


def test_stacked_noiseless_uses_only_stop_bits():
    net, code = noiseless_stacked_instance()
    r = stacked_correction_sim(net, code, {0, 1}, 8.0, seed=0, runs=20)
    assert r.e1_count == 0 and r.decode_errors == 0
    assert r.mean_correction_bits == r.stop_bits


def test_stacked_noisy_invariants():
    net, code = repetition_instance(0.1)
    r = stacked_correction_sim(net, code, {0, 1}, 0.3, seed=1, layers=4, runs=60)
    assert r.N == 4 and r.N_overridden
    assert r.z_outside_q == 0
    assert r.e1_count + r.decode_errors <= r.runs
    assert 0.0 <= r.decode_error_rate <= 1.0


def test_stacked_deterministic():
    net, code = repetition_instance(0.1)
    a = stacked_correction_sim(net, code, {0, 1}, 0.3, seed=4, layers=3, runs=10)
    b = stacked_correction_sim(net, code, {0, 1}, 0.3, seed=4, layers=3, runs=10)
    assert a.correction_bits_used == b.correction_bits_used
    assert a.decode_errors == b.decode_errors


def test_stacked_rejections():
    net, code = repetition_instance(0.1)
    with pytest.raises(ValidationError, match="transmitting"):
        stacked_correction_sim(net, code, {1}, 1.0, seed=0)
    with pytest.raises(ValidationError):
        stacked_correction_sim(net, code, {0, 1}, 0.0, seed=0)
    with pytest.raises(ValidationError):
        stacked_correction_sim(net, code, {0, 1}, 1.0, seed=None)


def test_stacked_e1_fires_with_tight_budget():
    net, code = repetition_instance(0.1)
    r = stacked_correction_sim(net, code, {0, 1}, 0.3, seed=2, layers=6, runs=200)
    assert r.e1_count > 0
    assert r.e1_rate <= r.e1_bound_at_N + 3 * r.e1_sigma
    assert r.decode_errors >= r.e1_count
