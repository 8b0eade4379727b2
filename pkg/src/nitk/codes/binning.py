"""Message coordination by random binning.

Each message set ``W_i`` is split uniformly at random into cells of size
``2^k``. Node ``a`` sees the cell indices and picks a message vector from
``Gamma`` inside the product cell, then sends ``d k`` bits of within-cell
indices. ``q(w~)`` is the chance that the product cell misses ``Gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..validation import ValidationError, check_random_state

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def binning_k(d, epsilon_tilde, epsilon):
    """``k = ceil(d + log2 ln(4d/eps~) - log2(1 - eps))``."""
    if d < 1:
        raise ValidationError("binning: d must be >= 1")
    if not 0.0 < epsilon_tilde < 1.0:
        raise ValidationError("binning: epsilon_tilde must lie in (0, 1)")
    if not 0.0 <= epsilon < 1.0:
        raise ValidationError("binning: epsilon must lie in [0, 1)")
    val = d + math.log2(math.log(4 * d / epsilon_tilde)) - math.log2(1.0 - epsilon)
    # guard against 6.0000000001 style round-off
    return max(1, math.ceil(val - 1e-12))


def binning_eta(d, epsilon_tilde):
    return 3 * d * (d + 1) + 3 * d * math.log2(math.log(4 * d / epsilon_tilde))


def feasibility_constant(k):
    """``(1 - 2^-k)^(-2^k)``, which stays below 4 for every ``k >= 1``."""
    m = 2.0 ** k
    return math.exp(-m * math.log1p(-1.0 / m))


def _log_binom(a, b):
    if b > a:
        return -math.inf
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def proof_bound(message_sizes, k, epsilon):
    """Sum over ``i`` of ``C(M_i - (1-eps) M_i 2^-i, 2^k) / C(M_i, 2^k)``."""
    cell = 2 ** k
    total = 0.0
    for i, m in enumerate(message_sizes, start=1):
        top = m - (1.0 - epsilon) * m * 2.0 ** (-i)
        total += math.exp(_log_binom(top, cell) - _log_binom(m, cell))
    return total


def _mix(x, key, bits):
    """A keyed bijection of ``bits``-bit integers (xorshift-multiply rounds)."""
    mask = np.uint64((1 << bits) - 1) if bits < 64 else _MASK64
    x = (x ^ key) & mask
    shift = np.uint64(max(1, bits // 2))
    for mult in (0xBF58476D1CE4E5B9, 0x94D049BB133111EB, 0x9E3779B97F4A7C15):
        x = (x ^ (x >> shift)) & mask
        x = (x * np.uint64(mult)) & mask  # odd multiplier: bijective mod 2^bits
    return x


class SyntheticGamma:
    """A seeded pseudorandom subset of ``[0, size)`` with exactly ``ceil(density * size)`` members.

    Membership is ``perm(r) < count`` for a keyed permutation ``perm`` built by
    cycle-walking a bijection on the next power of two.
    """

    def __init__(self, size, density, seed):
        if not 0.0 <= density <= 1.0:
            raise ValidationError("gamma density must lie in [0, 1]")
        self.size = int(size)
        self.density = float(density)
        self.count = min(self.size, math.ceil(density * self.size - 1e-9))
        self.bits = max(1, (self.size - 1).bit_length())
        if self.bits > 64:
            raise ValidationError("message space too large for the synthetic gamma predicate")
        rng = check_random_state(seed)
        self.key = np.uint64(int(rng.integers(0, 2 ** 63)))

    def _perm(self, r):
        x = np.asarray(r, dtype=np.uint64)
        y = _mix(x, self.key, self.bits)
        bad = y >= np.uint64(self.size)
        while np.any(bad):
            y[bad] = _mix(y[bad], self.key, self.bits)
            bad = y >= np.uint64(self.size)
        return y

    def contains(self, ranks):
        return self._perm(ranks) < np.uint64(self.count)


class ExplicitGamma:
    def __init__(self, size, members):
        self.size = int(size)
        self._mask = np.zeros(self.size, dtype=bool)
        self._mask[np.asarray(list(members), dtype=np.int64)] = True
        self.count = int(self._mask.sum())
        self.density = self.count / self.size

    def contains(self, ranks):
        return self._mask[np.asarray(ranks, dtype=np.int64)]


@dataclass(frozen=True, eq=False)
class BinningPlan:
    """One draw of the per-message partitions; ``partitions[i]`` has shape ``(M_i / 2^k, 2^k)``."""

    d: int
    k: int
    eta: float
    partitions: tuple
    seed: object

    def cell(self, w_tilde):
        return tuple(p[wt] for p, wt in zip(self.partitions, w_tilde))

    def choose(self, w_tilde, gamma, message_sizes):
        """Lowest-rank member of ``Gamma`` in the product cell and its within-cell indices, or None."""
        cells = self.cell(w_tilde)
        grids = np.meshgrid(*cells, indexing="ij")
        ranks = np.ravel_multi_index(tuple(g.ravel() for g in grids), message_sizes)
        hit = np.flatnonzero(gamma.contains(ranks))
        if hit.size == 0:
            return None
        best = hit[np.argmin(ranks[hit])]
        idx = np.unravel_index(best, tuple(len(c) for c in cells))
        w = tuple(int(c[i]) for c, i in zip(cells, idx))
        return w, tuple(int(i) for i in idx)


def draw_plan(message_sizes, k, rng, d=None, seed=None, epsilon_tilde=None):
    parts = []
    cell = 2 ** k
    for m in message_sizes:
        if m % cell:
            raise ValidationError(f"binning: message size {m} is not a multiple of 2^k = {cell}")
        parts.append(rng.permutation(m).reshape(m // cell, cell))
    d = len(message_sizes) if d is None else d
    eta = binning_eta(d, epsilon_tilde) if epsilon_tilde is not None else math.nan
    return BinningPlan(d, k, eta, tuple(parts), seed)


@dataclass(frozen=True)
class BinningReport:
    d: int
    k: int
    eta: float
    epsilon: float
    epsilon_tilde: float
    gamma_size: int
    w_tildes: tuple
    q_estimates: tuple
    q_sigmas: tuple
    trials: int
    proof_bound: float
    feasibility: tuple

    @property
    def within_tolerance(self):
        return all(q <= self.epsilon_tilde + 3 * s for q, s in zip(self.q_estimates, self.q_sigmas))

    @property
    def feasibility_holds(self):
        return all(v <= 4.0 for v in self.feasibility)


def binning_coordination(gamma_density, message_sizes, epsilon_tilde, seed, trials=1000, *,
                         w_tildes=None, gamma_set=None, k=None):
    """Monte Carlo estimate of ``q(w~)`` over random partitions for several ``w~``."""
    sizes = tuple(int(m) for m in message_sizes)
    d = len(sizes)
    if d < 1 or any(m < 1 for m in sizes):
        raise ValidationError("binning: need at least one message size >= 1")
    epsilon = 1.0 - float(gamma_density)
    if k is None:
        k = binning_k(d, epsilon_tilde, epsilon)
    for m in sizes:
        if m & (m - 1):
            raise ValidationError(f"binning: message size {m} is not a power of two")
        if math.log2(m) < 2 * k:
            raise ValidationError(
                f"binning: nR_i = {int(math.log2(m))} < 2k = {2 * k}; outside the regime of the binning argument")
    if trials < 1:
        raise ValidationError("binning: trials must be >= 1")
    rng = check_random_state(seed)
    total = math.prod(sizes)
    if gamma_set is not None:
        gamma = ExplicitGamma(total, gamma_set)
    else:
        gamma = SyntheticGamma(total, gamma_density, rng)
    n_cells = [m // 2 ** k for m in sizes]
    if w_tildes is None:
        w_tildes = [tuple(0 for _ in sizes), tuple(c - 1 for c in n_cells),
                    tuple(c // 2 for c in n_cells)]
    w_tildes = [tuple(int(v) for v in wt) for wt in w_tildes]
    misses = np.zeros(len(w_tildes))
    for _ in range(trials):
        plan = draw_plan(sizes, k, rng)
        for j, wt in enumerate(w_tildes):
            if plan.choose(wt, gamma, sizes) is None:
                misses[j] += 1
    q = misses / trials
    sig = np.sqrt(q * (1 - q) / trials)
    return BinningReport(
        d, k, binning_eta(d, epsilon_tilde), epsilon, float(epsilon_tilde), gamma.count,
        tuple(w_tildes), tuple(float(v) for v in q), tuple(float(v) for v in sig), trials,
        proof_bound(sizes, k, epsilon), tuple(feasibility_constant(j) for j in range(1, 31)),
    )


__all__ = [
    "BinningPlan",
    "BinningReport",
    "ExplicitGamma",
    "SyntheticGamma",
    "binning_coordination",
    "binning_eta",
    "binning_k",
    "draw_plan",
    "feasibility_constant",
    "proof_bound",
]
