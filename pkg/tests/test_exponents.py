import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nitk.core import Channel
from nitk.exponents import (
    ChannelCapacity,
    DueckExponent,
    channel_capacity,
    check_exponent_condition,
    dueck_exponent,
    exponent_objective,
    exponent_slope_at_capacity,
)
from nitk.measures import binary_entropy
from nitk.validation import NotFittedError, ValidationError

NOISY = Channel.completely_noisy(2, 2).rows
CLEAN = np.eye(2)
TYPEWRITER = Channel.noisy_typewriter(4, (0, 1)).rows


def bsc(p):
    return Channel.bsc(p).rows


def arimoto_exponent(W, R, n_rho=400, n_p=401):
    """Dual form sup_rho min_P [E0(rho, P) - rho R] over rho in (-1, 0], binary input."""
    W = np.asarray(W, dtype=float)
    ps = np.linspace(0.0, 1.0, n_p)
    P = np.stack([ps, 1 - ps], axis=1)
    best = -math.inf
    for rho in np.linspace(-0.999, 0.0, n_rho):
        inner = (P @ W ** (1 / (1 + rho))) ** (1 + rho)
        e0 = -np.log2(inner.sum(axis=1))
        best = max(best, float((e0 - rho * R).min()))
    return best


# alpha values frozen after agreement with the dual oracle
FROZEN = [
    (((0.75, 0.25), (0.25, 0.75)), 0.3, 0.0150672),
    (((0.9, 0.1), (0.1, 0.9)), 0.7, 0.0207668),
    (((0.9, 0.1), (0.2, 0.8)), 0.8, 0.1099553),
    (((1.0, 0.0), (0.3, 0.7)), 0.9, 0.1519181),
]


def test_capacity_examples():
    res = channel_capacity(bsc(0.11), tol=1e-6)
    assert res.capacity == pytest.approx(1 - binary_entropy(0.11), abs=1e-6)
    assert channel_capacity(NOISY).capacity == pytest.approx(0.0, abs=1e-9)
    clean = channel_capacity(CLEAN)
    assert clean.capacity == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(clean.input_dist.probs, 0.5)
    assert np.allclose(clean.output_dist.probs, clean.input_dist.probs @ CLEAN)


def test_capacity_rejects_bad_tol():
    with pytest.raises(ValidationError):
        channel_capacity(CLEAN, tol=0)


def test_dueck_examples():
    assert dueck_exponent(NOISY, 0.5).alpha == pytest.approx(0.5, abs=1e-6)
    assert dueck_exponent(CLEAN, 1.5).alpha == pytest.approx(0.5, abs=1e-6)
    assert dueck_exponent(TYPEWRITER, 1.5).alpha == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("W,R,alpha", FROZEN)
def test_dueck_frozen_values(W, R, alpha):
    res = dueck_exponent(W, R)
    assert res.alpha == pytest.approx(alpha, abs=1e-6)
    assert res.alpha == pytest.approx(res.kl_part + res.rate_part, abs=1e-9)


@pytest.mark.parametrize("W,R,alpha", FROZEN)
def test_dueck_matches_dual_oracle(W, R, alpha):
    assert dueck_exponent(W, R).alpha == pytest.approx(arimoto_exponent(W, R), abs=2e-5)


def test_minimizer_reproduces_alpha():
    res = dueck_exponent(bsc(0.2), 0.6)
    assert exponent_objective(bsc(0.2), res.minimizer, 0.6) == pytest.approx(res.alpha, abs=1e-9)


def test_dueck_rejects_negative_rate():
    with pytest.raises(ValidationError):
        dueck_exponent(CLEAN, -0.1)
    with pytest.raises(ValidationError, match="infeasible"):
        dueck_exponent(CLEAN, 0.5, grid=0)


def test_condition_examples():
    c = check_exponent_condition(bsc(0.1))
    assert not c.holds
    assert c.margin + c.capacity == pytest.approx(math.log2(0.9 / 0.5), abs=1e-9)
    assert check_exponent_condition(NOISY).holds
    clean = check_exponent_condition(CLEAN)
    assert clean.holds and clean.margin == pytest.approx(0.0, abs=1e-9)


def test_slope_examples():
    d = exponent_slope_at_capacity(bsc(0.25), (0.04, 0.02, 0.01))
    assert not d.condition_holds
    assert d.strictly_decreasing
    assert exponent_slope_at_capacity(NOISY).slope_estimates == (1.0, 1.0, 1.0)
    assert exponent_slope_at_capacity(CLEAN).slope_estimates == (1.0, 1.0, 1.0)


def test_slope_rejects_unordered_deltas():
    with pytest.raises(ValidationError):
        exponent_slope_at_capacity(CLEAN, (0.01, 0.02))


def test_estimators():
    cap = ChannelCapacity().fit(bsc(0.11))
    assert cap.capacity_ == pytest.approx(1 - binary_entropy(0.11), abs=1e-8)
    est = DueckExponent(grid=16)
    with pytest.raises(NotFittedError):
        est.transform([0.5])
    out = est.fit_transform(CLEAN, [0.5, 1.5])
    assert out == pytest.approx([0.0, 0.5], abs=1e-6)


binary_channel = st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)).map(
    lambda ab: np.array([[ab[0], 1 - ab[0]], [ab[1], 1 - ab[1]]])
)


@settings(max_examples=15)
@given(binary_channel, st.floats(0.0, 1.0))
def test_zero_below_capacity(W, frac):
    C = channel_capacity(W).capacity
    assert dueck_exponent(W, frac * C).alpha == pytest.approx(0.0, abs=1e-7)


@settings(max_examples=15)
@given(binary_channel, st.floats(0.05, 1.0))
def test_alpha_between_zero_and_gap(W, excess):
    C = channel_capacity(W).capacity
    a = dueck_exponent(W, C + excess).alpha
    assert -1e-12 <= a <= excess + 1e-7


@settings(max_examples=10)
@given(binary_channel, st.floats(0.05, 0.6))
def test_refinement_never_hurts(W, excess):
    C = channel_capacity(W).capacity
    coarse = dueck_exponent(W, C + excess, grid=4, refine=0).alpha
    fine = dueck_exponent(W, C + excess, grid=4, refine=3).alpha
    assert fine <= coarse + 1e-12
