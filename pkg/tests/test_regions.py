import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nitk.acceptance import no_cross_ic, random_wringing_joint, xor_ic
from nitk.core import Network
from nitk.exponents import channel_capacity
from nitk.measures import binary_entropy
from nitk.regions import (
    cutset_bound,
    ic_region_sample,
    ic_strong_interference_check,
    ic_strong_region,
    joint_input_grid,
    product_input_grid,
    wringing,
)
from nitk.validation import ValidationError


def full_observation_ic():
    K = np.zeros((4, 16))
    for x1, x2 in product(range(2), repeat=2):
        s = x1 * 2 + x2
        K[s, s * 4 + s] = 1.0
    return Network(4, (2, 2, 0, 0), (0, 0, 4, 4), K, ({2}, {3}, set(), set()))


def test_cutset_noiseless_p2p():
    net = Network.point_to_point(np.eye(2))
    (c,) = cutset_bound(net, joint_input_grid(net, 10))
    assert c.cut == (0,) and c.crossing_flows == (0,)
    assert c.bound == pytest.approx(1.0) and c.slack == 0.0


def test_cutset_bsc_matches_capacity():
    W = [[0.89, 0.11], [0.11, 0.89]]
    net = Network.point_to_point(W)
    (c,) = cutset_bound(net, joint_input_grid(net, 200))
    assert c.bound == pytest.approx(channel_capacity(W).capacity, abs=1e-6)
    assert c.bound == pytest.approx(1 - binary_entropy(0.11), abs=1e-6)
    (c2,) = cutset_bound(net, joint_input_grid(net, 200), k_rate=0.1)
    assert c2.limit == pytest.approx(c.bound + 0.1)
    assert c2.satisfied_by((c.bound + 0.05,)) and not c2.satisfied_by((c.bound + 0.2,))


def test_cutset_errors():
    net = Network.point_to_point(np.eye(2))
    with pytest.raises(ValidationError):
        cutset_bound(net, [])
    with pytest.raises(ValidationError):
        cutset_bound(net, [[0.5, 0.5]], k_rate=-1)


@settings(max_examples=20)
@given(st.floats(0.0, 0.5), st.integers(2, 12))
def test_cutset_refinement_monotone(p, g):
    net = Network.point_to_point([[1 - p, p], [p, 1 - p]])
    coarse = cutset_bound(net, joint_input_grid(net, g))[0].bound
    fine = cutset_bound(net, joint_input_grid(net, 2 * g))[0].bound
    assert fine >= coarse - 1e-12


def test_ic_check_examples():
    assert ic_strong_interference_check(xor_ic(), grid=10).holds
    bad = ic_strong_interference_check(no_cross_ic(), grid=10)
    assert not bad.holds and bad.worst_margin == pytest.approx(1.0)
    assert ic_strong_interference_check(full_observation_ic(), grid=10).holds


def test_ic_shape_rejected():
    with pytest.raises(ValidationError, match="shape"):
        ic_strong_interference_check(Network.point_to_point(np.eye(2)))


def test_ic_region_examples():
    u = [[0.5, 0.5]]
    s = ic_region_sample(xor_ic(), [1.0], u, u)
    assert s.sum_bound == pytest.approx(1.0)
    f = ic_region_sample(full_observation_ic(), [1.0], u, u)
    assert (f.r1_bound, f.r2_bound, f.sum_bound) == pytest.approx((1.0, 1.0, 2.0))
    pm = ic_region_sample(full_observation_ic(), [0.4, 0.6], [[1, 0], [0, 1]], [[0.5, 0.5], [0.2, 0.8]])
    assert pm.r1_bound == pytest.approx(0.0, abs=1e-12)


def test_ic_region_sampling_is_seeded():
    a = ic_strong_region(xor_ic(), samples=5, seed=4)
    b = ic_strong_region(xor_ic(), samples=5, seed=4)
    assert a == b
    assert all(s.sum_bound <= 1 + 1e-9 for s in a)


def test_ic_joint_inputs_consistent():
    chk = ic_strong_interference_check(xor_ic(), grid=8, joint_samples=300, seed=1)
    assert chk.holds and chk.joint_holds


def correlated_first_letter(n):
    J = np.zeros((2 ** n, 2 ** n))
    rest = 2 ** (n - 1)
    for b in range(2):
        for r1 in range(rest):
            for r2 in range(rest):
                J[b * rest + r1, b * rest + r2] = 0.5 / rest ** 2
    return J


def test_wringing_examples():
    r = wringing(np.outer(np.full(8, 1 / 8), np.full(8, 1 / 8)), [1.0], 0.5)
    assert r.m == 0 and r.t_list == ()
    r = wringing(correlated_first_letter(4), [1.0], 1.0)
    assert r.m == 1 and r.t_list == (0,)
    assert max(r.residual_mi) == pytest.approx(0.0, abs=1e-12) and r.threshold == pytest.approx(0.5)
    r = wringing([[0.5, 0], [0, 0.5]], [1.0], 1.0)
    assert r.m == 0 and r.residual_mi[0] == pytest.approx(1.0) and r.within_bounds


def test_wringing_precondition():
    with pytest.raises(ValidationError):
        wringing([[0.5, 0], [0, 0.5]], [1.0], 0.5)
    with pytest.raises(ValidationError, match="cap"):
        wringing(correlated_first_letter(4), [1.0], 1.0, cap=10)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_wringing_bounds(seed):
    joint, kn = random_wringing_joint(seed)
    r = wringing(joint, [1.0], kn)
    n = len(r.residual_mi)
    assert r.m <= math.sqrt(n * r.k_n) + 1e-12
    assert max(r.residual_mi) <= math.sqrt(kn / n) + 1e-12
    assert r.final_block_mi <= kn - r.m * math.sqrt(kn / n) + 1e-9
