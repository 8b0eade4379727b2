"""Computable outer bounds: cut-set with extra-edge slack, the strong-interference
interference channel, and the wringing step used to single-letterize it."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import Network
from .measures import composition_grid, conditional_mutual_information
from .validation import ValidationError, check_probability_vector, check_random_state

WRINGING_CAP = 2 ** 22
IC_Q_SIZE = 4


@dataclass(frozen=True)
class CutConstraint:
    """``sum_{i in crossing_flows} R_i <= bound + slack``."""

    cut: tuple
    crossing_flows: tuple
    bound: float
    slack: float
    certificate: int

    @property
    def limit(self):
        return self.bound + self.slack

    def satisfied_by(self, rates, tol=0.0):
        return sum(rates[i] for i in self.crossing_flows) <= self.limit + tol


def _node_tensor(net, input_joint):
    p = check_probability_vector(np.ravel(input_joint), name="input distribution")
    if p.size != net.kernel.shape[0]:
        raise ValidationError("input distribution: dimension mismatch with network inputs")
    return (p[:, None] * net.kernel).reshape(net.in_sizes + net.out_sizes)


def joint_input_grid(net, resolution):
    """All joint input pmfs with entries in multiples of ``1/resolution``."""
    if resolution < 1:
        raise ValidationError("grid resolution must be >= 1")
    n = net.kernel.shape[0]
    return composition_grid(int(resolution), n) / resolution


def product_input_grid(sizes, resolution):
    """Product pmfs from per-node composition grids, flattened row-major."""
    grids = [composition_grid(int(resolution), s) / resolution for s in sizes]
    out = []
    for combo in np.ndindex(*(len(g) for g in grids)):
        p = np.ones(1)
        for g, i in zip(grids, combo):
            p = np.outer(p, g[i]).ravel()
        out.append(p)
    return np.array(out)


def crossing_flows(net, cut):
    s = set(cut)
    return tuple(i for i in sorted(s) if net.demands[i] - s)


def cutset_bound(net, dist_samples, k_rate=0.0):
    """Per-cut maxima of ``I(X_S; Y_{S^c} | X_{S^c})`` over the given input pmfs."""
    if not isinstance(net, Network):
        raise ValidationError("cutset_bound: expected a Network")
    samples = list(dist_samples)
    if not samples:
        raise ValidationError("cutset_bound: empty sample set")
    if k_rate < 0:
        raise ValidationError("cutset_bound: extra-edge rate must be >= 0")
    d = net.d
    cuts = [c for r in range(1, d + 1) for c in combinations(range(d), r) if crossing_flows(net, c)]
    tensors = [_node_tensor(net, s) for s in samples]
    out = []
    for cut in cuts:
        comp = [j for j in range(d) if j not in cut]
        best, arg = -1.0, 0
        for idx, t in enumerate(tensors):
            v = conditional_mutual_information(t, list(cut), [d + j for j in comp], comp)
            if v > best:
                best, arg = v, idx
        out.append(CutConstraint(tuple(cut), crossing_flows(net, cut), best, float(k_rate), arg))
    return out


# interference channel ------------------------------------------------------


def check_ic_shape(net):
    ok = (
        net.d == 4
        and net.output_alphabets[0] == 0 and net.output_alphabets[1] == 0
        and net.input_alphabets[2] == 0 and net.input_alphabets[3] == 0
        and net.input_alphabets[0] > 0 and net.input_alphabets[1] > 0
        and net.demands[0] == frozenset({2}) and net.demands[1] == frozenset({3})
        and not net.demands[2] and not net.demands[3]
    )
    if not ok:
        raise ValidationError(
            "wrong network shape: need 4 nodes, encoders 0 and 1 without outputs, "
            "decoders 2 and 3 without inputs, demands 0->2 and 1->3"
        )


def ic_kernel(net):
    """``K[x1, x2, y3, y4]`` of an interference-channel network."""
    check_ic_shape(net)
    a1, a2 = net.input_alphabets[:2]
    b3, b4 = net.out_sizes[2:]
    return net.kernel.reshape(a1, a2, b3, b4)


def _ic_margins(K, pxx):
    t = pxx[:, :, None, None] * K
    # axes: 0 = X1, 1 = X2, 2 = Y3, 3 = Y4
    m1 = conditional_mutual_information(t, [0], [2], [1]) - conditional_mutual_information(t, [0], [3], [1])
    m2 = conditional_mutual_information(t, [1], [3], [0]) - conditional_mutual_information(t, [1], [2], [0])
    return m1, m2


@dataclass(frozen=True)
class StrongInterferenceCheck:
    holds: bool
    worst_margin: float
    worst_dist: tuple
    joint_holds: bool
    joint_worst_margin: float
    joint_samples: int


def ic_strong_interference_check(net, grid=20, tol=1e-9, joint_samples=200, seed=0):
    """Both strong-interference inequalities over a product grid, plus random joint inputs.

    Margins are ``lhs - rhs`` so the check holds when the worst margin is ``<= tol``.
    """
    K = ic_kernel(net)
    a1, a2 = K.shape[:2]
    g1 = composition_grid(int(grid), a1) / grid
    g2 = composition_grid(int(grid), a2) / grid
    worst, arg = -math.inf, None
    for p1 in g1:
        for p2 in g2:
            m = max(_ic_margins(K, np.outer(p1, p2)))
            if m > worst:
                worst, arg = m, (tuple(p1), tuple(p2))
    rng = check_random_state(seed)
    jworst = -math.inf
    for _ in range(joint_samples):
        pxx = rng.dirichlet(np.ones(a1 * a2)).reshape(a1, a2)
        jworst = max(jworst, *_ic_margins(K, pxx))
    holds = worst <= tol
    return StrongInterferenceCheck(holds, float(worst), arg, bool(jworst <= tol), float(jworst), joint_samples)


@dataclass(frozen=True)
class ICRegionSample:
    q_dist: tuple
    cond1: tuple
    cond2: tuple
    r1_bound: float
    r2_bound: float
    sum_bound: float


def ic_region_sample(net, q_dist, cond1, cond2):
    """Region bounds for ``P_Q P_{X1|Q} P_{X2|Q}``; ``cond*`` are ``(|Q|, |X|)`` rows."""
    K = ic_kernel(net)
    q = check_probability_vector(q_dist, name="P_Q")
    c1 = np.asarray(cond1, dtype=float).reshape(q.size, -1)
    c2 = np.asarray(cond2, dtype=float).reshape(q.size, -1)
    if q.size > IC_Q_SIZE:
        raise ValidationError(f"auxiliary alphabet larger than {IC_Q_SIZE}")
    if c1.shape[1] != K.shape[0] or c2.shape[1] != K.shape[1]:
        raise ValidationError("conditional input distributions: dimension mismatch")
    for row in list(c1) + list(c2):
        check_probability_vector(row, name="conditional input distribution")
    # axes: 0 = Q, 1 = X1, 2 = X2, 3 = Y3, 4 = Y4
    t = q[:, None, None, None, None] * c1[:, :, None, None, None] * c2[:, None, :, None, None] * K[None]
    r1 = conditional_mutual_information(t, [1], [3], [2, 0])
    r2 = conditional_mutual_information(t, [2], [4], [1, 0])
    s = min(conditional_mutual_information(t, [1, 2], [3], [0]),
            conditional_mutual_information(t, [1, 2], [4], [0]))

    def rows(a):
        return tuple(tuple(float(v) for v in r) for r in a)

    return ICRegionSample(tuple(float(v) for v in q), rows(c1), rows(c2), r1, r2, s)


def ic_strong_region(net, samples=100, seed=None, check=None):
    """Random ``|Q| <= 4`` samples of the strong-interference region bounds.

    The first sample is always degenerate ``Q`` with uniform inputs.
    """
    K = ic_kernel(net)
    if check is None:
        check = ic_strong_interference_check(net)
    if not check.holds:
        warnings.warn("strong-interference check did not pass; bounds are still reported", stacklevel=2)
    a1, a2 = K.shape[:2]
    rng = check_random_state(seed)
    out = [ic_region_sample(net, [1.0], [np.full(a1, 1 / a1)], [np.full(a2, 1 / a2)])]
    for _ in range(max(samples - 1, 0)):
        qs = int(rng.integers(1, IC_Q_SIZE + 1))
        q = rng.dirichlet(np.ones(qs))
        out.append(ic_region_sample(net, q, rng.dirichlet(np.ones(a1), qs), rng.dirichlet(np.ones(a2), qs)))
    return out


# wringing ------------------------------------------------------------------


@dataclass(frozen=True)
class WringingResult:
    t_list: tuple
    m: int
    residual_mi: tuple
    threshold: float
    block_mi: float
    final_block_mi: float
    k_n: float

    @property
    def within_bounds(self):
        n = len(self.residual_mi)
        return (
            self.m <= math.sqrt(n * self.k_n) + 1e-12
            and all(r <= self.threshold + 1e-12 for r in self.residual_mi)
            and self.final_block_mi <= self.k_n - self.m * self.threshold + 1e-12
        )


def _infer_length(size, a):
    n = round(math.log(size, a)) if a > 1 else 1
    if a ** n != size:
        raise ValidationError("wringing: joint table size is not a power of the alphabet size")
    return n


def wringing(joint, z_dist, k_n, a1=2, a2=2, cap=WRINGING_CAP):
    """Select coordinates to condition on until every per-letter pair is nearly independent.

    ``joint[z]`` is the ``(a1**n, a2**n)`` pmf of ``(X1^n, X2^n)`` given ``Z = z``.
    A coordinate is selected when its conditional mutual information is strictly
    above ``sqrt(k_n / n)``; among those the largest is taken, lowest index on ties.
    """
    J = np.asarray(joint, dtype=float)
    if J.ndim == 2:
        J = J[None]
    z = check_probability_vector(z_dist, name="Z distribution")
    if J.ndim != 3 or J.shape[0] != z.size:
        raise ValidationError("wringing: joint must have shape (|Z|, a1**n, a2**n)")
    if J.size > cap:
        raise ValidationError(f"enumeration cap exceeded ({J.size} > {cap})")
    n = _infer_length(J.shape[1], a1)
    if _infer_length(J.shape[2], a2) != n:
        raise ValidationError("wringing: X1 and X2 blocks have different lengths")
    for zi in range(z.size):
        check_probability_vector(J[zi].ravel(), name=f"joint given Z={zi}")
    if k_n <= 0:
        raise ValidationError("wringing: k_n must be > 0")
    T = (z[:, None, None] * J).reshape((z.size,) + (a1,) * n + (a2,) * n)
    x1 = [1 + t for t in range(n)]
    x2 = [1 + n + t for t in range(n)]

    def block(cond):
        cs = set(cond)
        return conditional_mutual_information(
            T, [a for a in x1 if a not in cs], [a for a in x2 if a not in cs], cond)

    def letters(cond):
        cs = set(cond)
        return [0.0 if x1[t] in cs else conditional_mutual_information(T, [x1[t]], [x2[t]], cond)
                for t in range(n)]

    total = block([0])
    if total > k_n + 1e-12:
        raise ValidationError(
            f"precondition violated: I(X1^n; X2^n | Z) = {total:.6g} exceeds k_n = {k_n:.6g}")
    thr = math.sqrt(k_n / n)
    cond = [0]
    chosen = []
    res = letters(cond)
    while True:
        cands = [t for t in range(n) if res[t] > thr]
        if not cands:
            break
        t = max(cands, key=lambda s: (res[s], -s))
        chosen.append(t)
        cond = cond + [x1[t], x2[t]]
        res = letters(cond)
    return WringingResult(tuple(chosen), len(chosen), tuple(res), thr, total, block(cond), float(k_n))


__all__ = [
    "CutConstraint",
    "ICRegionSample",
    "StrongInterferenceCheck",
    "WringingResult",
    "check_ic_shape",
    "crossing_flows",
    "cutset_bound",
    "ic_kernel",
    "ic_region_sample",
    "ic_strong_interference_check",
    "ic_strong_region",
    "joint_input_grid",
    "product_input_grid",
    "wringing",
]
