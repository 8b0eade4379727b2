"""The fourteen acceptance checks and the instances they run on.

``run_suite(name)`` returns one :class:`CheckResult` per check; the CLI
``suite`` command and ``tests/test_acceptance.py`` both go through here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .codes.binning import binning_coordination
from .codes.lemma1 import lemma1_transform
from .codes.mds import mds_pipeline
from .codes.oracle import brute_force_min_error, oracle_space_size
from .codes.search import search_best_code
from .codes.stacked import stacked_correction_sim
from .core import Channel, Code, ModifiedCode, Network, bit_pipe_schedule, modified_network
from .coupling import EventSet, MarkovSource, blowup_corollary, verify_blowup_bound
from .exponents import channel_capacity, check_exponent_condition, dueck_exponent, exponent_slope_at_capacity
from .measures import binary_entropy, conditional_mutual_information
from .regions import cutset_bound, ic_strong_interference_check, ic_strong_region, joint_input_grid, wringing
from .validation import ValidationError


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


# instances -----------------------------------------------------------------


def relay_pair(W):
    """Node 0 sends through ``W`` to node 1; node 1 has a dummy binary input."""
    W = np.asarray(W, dtype=float)
    K = np.zeros((2 * W.shape[0], W.shape[1]))
    for x0 in range(W.shape[0]):
        K[2 * x0] = K[2 * x0 + 1] = W[x0]
    return Network(2, (W.shape[0], 2), (0, W.shape[1]), K, ({1}, set()))


def _null_encoders(n, ysize):
    return tuple(np.zeros((1, ysize ** t), dtype=np.int64) for t in range(n))


def noiseless_stacked_instance():
    """Two channel uses carrying a 2-bit message over a noiseless binary link."""
    net = relay_pair(np.eye(2))
    enc0 = (np.array([[0], [0], [1], [1]]), np.array([[0], [1], [0], [1]]))
    code = Code(2, (4, 1), (enc0, _null_encoders(2, 2)), {(0, 1): np.array([[0, 1, 2, 3]])})
    return net, code


def repetition_instance(p, n=3):
    """``n``-fold repetition over BSC(p) with majority decoding."""
    net = relay_pair([[1 - p, p], [p, 1 - p]])
    enc0 = tuple(np.array([[0], [1]]) for _ in range(n))
    maj = np.array([[int(bin(h).count("1") * 2 > n) for h in range(2 ** n)]])
    return net, Code(n, (2, 1), (enc0, _null_encoders(n, 2)), {(0, 1): maj})


def lemma1_network():
    """Deterministic ``Y_1 = X_0`` with a dummy input at node 1."""
    return relay_pair(np.eye(2))


def lemma1_family(limit=None):
    """Codes on the modified network with ``n = 1``, ``M = 4``, ``k = 1``, ``V = {0, 1}``.

    16 encoders x 16 relay maps that depend on the message only x 256 decoders.
    """
    net = lemma1_network()
    mn = modified_network(net, {0, 1}, 1, 1)
    enc1 = np.zeros((1, 1, 1), dtype=np.int64)
    count = 0
    for e in range(16):
        enc0 = np.array([(e >> b) & 1 for b in range(4)]).reshape(4, 1, 1)
        for r in range(16):
            rel = np.array([(r >> b) & 1 for b in range(4)])
            relay = np.stack([rel, rel], axis=1)
            for dc in range(256):
                dec = np.array([(dc >> (2 * b)) & 3 for b in range(4)]).reshape(1, 2, 2)
                yield ModifiedCode(mn, 1, (4, 1), ((enc0,), (enc1,)), (relay,), {(0, 1): dec})
                count += 1
                if limit is not None and count >= limit:
                    return


def markov_source3():
    return MarkovSource.markov_chain([0.6, 0.4], [[0.8, 0.2], [0.3, 0.7]], 3)


def all_nonempty_sets(b, n):
    size = b ** n
    for mask in range(1, 2 ** size):
        yield EventSet.from_ranks([r for r in range(size) if mask >> r & 1], b, n)


def xor_ic():
    K = np.zeros((4, 4))
    for x1, x2 in product(range(2), repeat=2):
        s = x1 ^ x2
        K[x1 * 2 + x2, s * 2 + s] = 1.0
    return Network(4, (2, 2, 0, 0), (0, 0, 2, 2), K, ({2}, {3}, set(), set()))


def no_cross_ic():
    K = np.zeros((4, 4))
    for x1, x2 in product(range(2), repeat=2):
        K[x1 * 2 + x2, x1 * 2 + x2] = 1.0
    return Network(4, (2, 2, 0, 0), (0, 0, 2, 2), K, ({2}, {3}, set(), set()))


def _dyadic_rows(rng, rows, cols):
    out = np.zeros((rows, cols))
    for r in range(rows):
        for _ in range(4):
            out[r, rng.integers(cols)] += 0.25
    return out


def oracle_instance(seed):
    """A tiny network with quarter-valued kernel entries and power-of-two message sizes."""
    rng = np.random.default_rng([13, seed])
    kind = seed % 4
    if kind == 0:  # point to point, one use, up to 4 messages
        W = _dyadic_rows(rng, 2, 2)
        net = Network.point_to_point(W)
        return net, 1, (int(rng.choice([2, 4])), 1)
    if kind == 1:  # point to point, two uses with feedback-free encoding
        W = _dyadic_rows(rng, 2, 2)
        return Network.point_to_point(W), 2, (2, 1)
    if kind == 2:  # broadcast to two receivers
        K = _dyadic_rows(rng, 2, 4)
        return Network(3, (2, 0, 0), (0, 2, 2), K, ({1, 2}, set(), set())), 1, (2, 1, 1)
    # node 1 hears node 0 and can transmit to node 2 at the second step
    W1 = _dyadic_rows(rng, 2, 2)
    W2 = _dyadic_rows(rng, 2, 2)
    K = np.zeros((4, 4))
    for x0, x1 in product(range(2), repeat=2):
        K[x0 * 2 + x1] = np.outer(W1[x0], W2[x1]).ravel()
    return Network(3, (2, 2, 0), (0, 2, 2), K, ({2}, set(), set())), 2, (2, 1, 1)


# checks --------------------------------------------------------------------


def check_capacity():
    t = time.perf_counter()
    c = channel_capacity(Channel.bsc(0.11), 1e-6).capacity
    dt = time.perf_counter() - t
    ref = 1.0 - binary_entropy(0.11)
    err = abs(c - ref)
    return err <= 1e-4 and dt < 1.0, f"C = {c:.7f}, 1 - H(0.11) = {ref:.7f}, |diff| = {err:.1e}, {dt:.3f}s < 1s"


def check_dueck():
    parts, ok = [], True
    for name, ch in (("noisy", Channel.completely_noisy(2, 2)), ("typewriter4", Channel.noisy_typewriter(4, (0, 1)))):
        t = time.perf_counter()
        C = channel_capacity(ch, 1e-10).capacity
        top = math.log2(ch.n_inputs)
        rates = [C + (top - C) * j / 10 for j in range(1, 11)]
        worst = max(abs(dueck_exponent(ch, R).alpha - (R - C)) for R in rates)
        dt = time.perf_counter() - t
        ok &= worst <= 1e-3 and dt < 60.0
        parts.append(f"{name} max|alpha-(R-C)| = {worst:.1e} in {dt:.1f}s")
    return ok, "; ".join(parts)


def check_slope():
    ch = Channel.bsc(0.25)
    cond = check_exponent_condition(ch)
    diag = exponent_slope_at_capacity(ch, (0.04, 0.02, 0.01))
    s = ", ".join(f"{v:.5f}" for v in diag.slope_estimates)
    ok = (not cond.holds) and diag.strictly_decreasing
    return ok, f"condition holds = {cond.holds} (margin {cond.margin:.4f}); alpha(C+d)/d = [{s}]"


def check_coupling():
    t = time.perf_counter()
    src = markov_source3()
    bad, worst = 0, -math.inf
    for A in all_nonempty_sets(2, 3):
        rep = verify_blowup_bound(src, A)
        if not (rep.z_in_A and rep.exact_expected_hamming <= rep.bound + 1e-12):
            bad += 1
        worst = max(worst, rep.exact_expected_hamming - rep.bound)
    dt = time.perf_counter() - t
    return bad == 0 and dt < 10.0, f"255 sets, {bad} violations, max(E d_H - bound) = {worst:.4f}, {dt:.2f}s < 10s"


def check_blowup():
    src = MarkovSource.iid([0.5, 0.5], 3)
    bad = total = 0
    for A in all_nonempty_sets(2, 3):
        for ell in (1, 2, 3):
            total += 1
            chk = blowup_corollary(src, A, ell, exact=True)
            if not chk.holds:
                bad += 1
    return bad == 0, f"{total} (set, ell) pairs, {bad} violations"


def check_lemma1(limit=None):
    net = lemma1_network()
    bad = ties = count = 0
    worst = -math.inf
    for mc in lemma1_family(limit):
        res = lemma1_transform(net, {0, 1}, 1, mc)
        count += 1
        gap = res.report.error_prob - res.bound
        worst = max(worst, gap)
        bad += not res.within_bound
        ties += abs(gap) <= 1e-12
    ok = bad == 0 and count >= 2 ** 12
    return ok, f"{count} codes, {bad} violations, {ties} equality cases, max(err - bound) = {worst:.3g}"


def check_binning():
    rep = binning_coordination(0.5, (4096, 4096), 0.1, seed=7, trials=1000)
    q = ", ".join(f"{v:.4f}" for v in rep.q_estimates)
    ok = rep.k == 6 and rep.within_tolerance and rep.feasibility_holds
    return ok, (f"k = {rep.k}, eta = {rep.eta:.2f}, q_hat = [{q}] <= 0.1 + 3 sigma, "
                f"max (1-2^-k)^(-2^k) over k=1..30 = {max(rep.feasibility):.4f} <= 4")


def check_mds():
    parts, ok = [], True
    for i, (eps, N) in enumerate(((0.1, 3), (0.1, 4), (0.3, 4))):
        r = mds_pipeline(eps, N, seed=100 + i, trials=100_000)
        ok &= r.within_3_sigma
        parts.append(f"({eps},{N}) emp {r.empirical_error:.4f} vs {r.formula_error:.4f}")
    return ok, "; ".join(parts)


def check_cutset():
    net = Network.point_to_point(Channel.bsc(0.11))
    grid = joint_input_grid(net, 1000)
    cap = 1.0 - binary_entropy(0.11)
    base = cutset_bound(net, grid)
    slack = cutset_bound(net, grid, k_rate=0.1)
    b = base[0].bound
    ok = len(base) == 1 and abs(b - cap) <= 5e-3 and slack[0].limit == slack[0].bound + 0.1 \
        and slack[0].bound == b
    return ok, f"bound {b:.6f} vs C {cap:.6f}; with extra edge 0.1 limit = {slack[0].limit:.6f}"


def check_ic():
    xor = ic_strong_interference_check(xor_ic())
    nc = ic_strong_interference_check(no_cross_ic())
    sample = ic_strong_region(xor_ic(), samples=1, seed=0, check=xor)[0]
    ok = xor.holds and abs(xor.worst_margin) <= 1e-9 and not nc.holds and abs(sample.sum_bound - 1.0) <= 1e-9
    return ok, (f"XOR margin {xor.worst_margin:.1e} (holds {xor.holds}); no-cross margin {nc.worst_margin:.3f} "
                f"(holds {nc.holds}); XOR sum-rate at uniform inputs {sample.sum_bound:.12f}")


def random_wringing_joint(seed):
    """Per-letter correlated pairs, multiplied out and mixed with Dirichlet noise."""
    rng = np.random.default_rng([11, seed])
    n = int(rng.integers(1, 5))
    size = 2 ** n
    J = np.ones((1, 1))
    for _ in range(n):
        rho = float(rng.choice([0.0, 0.3, 0.7, 0.95, 1.0]))
        J = np.kron(J, (1 - rho) * np.full((2, 2), 0.25) + rho * np.eye(2) / 2)
    lam = float(rng.choice([0.0, 0.1, 0.5]))
    J = (1 - lam) * J + lam * rng.dirichlet(np.full(size * size, 0.5)).reshape(size, size)
    T = J.reshape((2,) * n + (2,) * n)
    mi = conditional_mutual_information(T, list(range(n)), list(range(n, 2 * n)))
    k_n = max(mi, 1e-6) * float(rng.uniform(1.0, 2.0))
    return J, k_n


def check_wringing():
    bad = 0
    for s in range(100):
        J, k_n = random_wringing_joint(s)
        if not wringing(J[None], [1.0], k_n).within_bounds:
            bad += 1
    return bad == 0, f"100 joints, {bad} violations of m, residual or conditional block bounds"


def check_stacked():
    net, code = noiseless_stacked_instance()
    r0 = stacked_correction_sim(net, code, {0, 1}, 1.0, seed=5, runs=20)
    ok0 = r0.decode_errors == 0 and all(b == r0.stop_bits for b in r0.correction_bits_used) \
        and all(c == 0 for ch in r0.changed_layers for c in ch)
    net, code = repetition_instance(0.1)
    r1 = stacked_correction_sim(net, code, {0, 1}, 8.0, seed=6, runs=400)
    ok1 = r1.e1_within_bound and r1.bound_comparable
    return ok0 and ok1, (f"noiseless: {r0.decode_errors} errors, bits per block {set(r0.correction_bits_used)} "
                         f"(= {r0.stop_bits} stop bits); noisy: E1 {r1.e1_rate:.3f} over {r1.runs} runs "
                         f"vs bound {r1.e1_bound:.3f} (N = {r1.N}, gamma = {r1.gamma_n:.3f})")


def check_oracle():
    bad = []
    for s in range(20):
        net, n, sizes = oracle_instance(s)
        if oracle_space_size(net, n, sizes) > 2 ** 12:
            raise ValidationError(f"oracle instance {s} too large")
        exact = brute_force_min_error(net, n, sizes)
        _, rep = search_best_code(net, n, sizes)
        if Fraction(rep.error_prob) != exact:
            bad.append(s)
    return not bad, f"20 instances, mismatches at {bad}"


def check_schedule():
    rng = np.random.default_rng(14)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        k = int(rng.integers(0, 1000))
        terms = [bit_pipe_schedule(k, n, t) for t in range(1, n + 1)]
        cum = np.cumsum(terms)
        if min(terms) < 0 or sum(terms) != k or any(cum[t - 1] != (k * t) // n for t in range(1, n + 1)):
            bad += 1
    return bad == 0, f"1000 (k, n) pairs, {bad} failures"


CHECKS = {
    1: ("capacity", "Capacity cross-check", check_capacity),
    2: ("dueck", "Dueck exponent, condition holds", check_dueck),
    3: ("slope", "Dueck exponent, condition fails", check_slope),
    4: ("coupling", "Causal blowing-up, exhaustive", check_coupling),
    5: ("blowup", "Classic blowing-up corollary", check_blowup),
    6: ("lemma1", "Lemma 1 exhaustive", check_lemma1),
    7: ("binning", "Binning", check_binning),
    8: ("mds", "MDS pipeline", check_mds),
    9: ("cutset", "Cut-set", check_cutset),
    10: ("ic", "Interference channel", check_ic),
    11: ("wringing", "Wringing", check_wringing),
    12: ("stacked", "Stacked protocol", check_stacked),
    13: ("oracle", "Oracle equivalence", check_oracle),
    14: ("schedule", "Schedule", check_schedule),
}

SUITES = {suite: (num,) for num, (suite, _, _) in CHECKS.items()}
SUITES["all"] = tuple(sorted(CHECKS))


def run_check(number):
    _, name, fn = CHECKS[number]
    t = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure, not an abort of the suite
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - t)


def run_suite(name):
    if name not in SUITES:
        raise ValidationError(f"unknown suite id {name!r}; choose from {sorted(SUITES)}")
    return [run_check(num) for num in SUITES[name]]


__all__ = ["CHECKS", "SUITES", "CheckResult", "run_check", "run_suite"]
