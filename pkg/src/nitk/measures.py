"""Exact information measures (base-2) and elementary probability bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import Channel, Distribution, JointDistribution
from .validation import (
    ValidationError,
    check_probability_vector,
    check_same_length,
    check_stochastic_matrix,
)

LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class SequenceAlphabet:
    """Sequences of ``length`` symbols over ``{0, ..., base_size - 1}``."""

    base_size: int
    length: int

    def __post_init__(self):
        if self.base_size < 1 or self.length < 1:
            raise ValidationError("sequence alphabet: need base_size >= 1 and length >= 1")

    @property
    def size(self):
        return self.base_size ** self.length

    def rank(self, seq):
        r = 0
        for s in seq:
            r = r * self.base_size + int(s)
        return r

    def unrank(self, r):
        out = [0] * self.length
        for t in range(self.length - 1, -1, -1):
            r, out[t] = divmod(r, self.base_size)
        return tuple(out)

    def all_sequences(self):
        """Array of shape ``(size, length)``, row ``r`` being ``unrank(r)``."""
        idx = np.arange(self.size)
        cols = []
        for t in range(self.length - 1, -1, -1):
            cols.append(idx % self.base_size)
            idx = idx // self.base_size
        return np.stack(cols[::-1], axis=1) if cols else np.zeros((1, 0), dtype=int)


def composition_grid(total, parts):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    bars = np.array(list(combinations(range(total + parts - 1), parts - 1)), dtype=np.int64)
    ext = np.concatenate(
        [np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), total + parts - 1)], axis=1
    )
    return np.diff(ext, axis=1) - 1


def _xlogx_ratio(p, q):
    """Elementwise ``p log2(p/q)`` with 0 log 0 = 0 and +inf where q = 0 < p."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.zeros(np.broadcast(p, q).shape)
    pos = p > 0
    bad = pos & (q <= 0)
    ok = pos & ~bad
    out[ok] = (p * (np.log2(np.where(ok, p, 1.0)) - np.log2(np.where(ok, q, 1.0))))[ok]
    out[bad] = math.inf
    return out


def entropy(p):
    p = check_probability_vector(p)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum()) + 0.0


def binary_entropy(p):
    return entropy([p, 1.0 - p])


def kl_divergence(P, Q):
    p = check_probability_vector(P, name="P")
    q = check_probability_vector(Q, name="Q")
    check_same_length(p, q, "kl_divergence")
    terms = _xlogx_ratio(p, q)
    if np.isinf(terms).any():
        return math.inf
    # rounding can push an exact zero slightly negative
    return max(float(terms.sum()), 0.0)


def conditional_kl(P_cond, Q_cond, R_X):
    """``D(P_cond || Q_cond | R_X)``; rows with ``R_X(x) = 0`` are ignored."""
    a = check_stochastic_matrix(P_cond, name="P_cond")
    b = check_stochastic_matrix(Q_cond, name="Q_cond")
    r = check_probability_vector(R_X, name="R_X")
    if a.shape != b.shape or r.size != a.shape[0]:
        raise ValidationError("conditional_kl: dimension mismatch")
    total = 0.0
    for x in np.flatnonzero(r > 0):
        d = kl_divergence(a[x], b[x])
        if math.isinf(d):
            return math.inf
        total += r[x] * d
    return total


def tv_distance(P, Q):
    p = check_probability_vector(P, name="P")
    q = check_probability_vector(Q, name="Q")
    check_same_length(p, q, "tv_distance")
    return min(0.5 * float(np.abs(p - q).sum()), 1.0)


def mutual_information(J):
    t = J.table if isinstance(J, JointDistribution) else JointDistribution(J).table
    px = t.sum(axis=1, keepdims=True)
    py = t.sum(axis=0, keepdims=True)
    # logs taken separately so tiny marginals cannot underflow to a zero product
    pos = t > 0
    with np.errstate(divide="ignore"):
        terms = np.where(pos, t * (np.log2(np.where(pos, t, 1.0)) - np.log2(np.where(pos, px, 1.0))
                                   - np.log2(np.where(pos, py, 1.0))), 0.0)
    return max(float(terms.sum()), 0.0)


def channel_mutual_information(input_dist, channel):
    """``I(X;Y)`` for ``X ~ input_dist`` through ``channel``."""
    return mutual_information(JointDistribution.from_input_and_channel(input_dist, channel))


def conditional_mutual_information(table, x_axes, y_axes, z_axes=()):
    """``I(X;Y|Z)`` for a joint pmf array with named axis groups."""
    t = np.asarray(table, dtype=float)
    axes = set(range(t.ndim))
    xs, ys, zs = set(x_axes), set(y_axes), set(z_axes)
    if xs & ys or xs & zs or ys & zs or not (xs | ys | zs) <= axes:
        raise ValidationError("conditional_mutual_information: bad axis groups")
    rest = tuple(axes - xs - ys - zs)
    if rest:
        t = t.sum(axis=rest, keepdims=True)
    pxz = t.sum(axis=tuple(ys), keepdims=True) if ys else t
    pyz = t.sum(axis=tuple(xs), keepdims=True) if xs else t
    pz = t.sum(axis=tuple(xs | ys), keepdims=True) if (xs | ys) else t
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(t > 0, t * pz / np.where(t > 0, pxz * pyz, 1.0), 1.0)
        val = np.where(t > 0, t * np.log2(ratio), 0.0).sum()
    return max(float(val), 0.0)


def hamming_distance(x, y):
    a = np.asarray(x)
    b = np.asarray(y)
    if a.shape != b.shape:
        raise ValidationError(f"hamming_distance: length mismatch ({a.shape} vs {b.shape})")
    return int(np.count_nonzero(a != b))


def reverse_markov_bound(mean, x_max, tau):
    """Lower bound on ``P(X > tau)`` for ``X`` in ``[0, x_max]`` with given mean."""
    if tau >= x_max:
        raise ValidationError("reverse_markov_bound: need tau < x_max")
    if tau > mean:
        raise ValidationError("reverse_markov_bound: need tau <= mean")
    if mean > x_max:
        raise ValidationError("reverse_markov_bound: need mean <= x_max")
    return min(max((mean - tau) / (x_max - tau), 0.0), 1.0)


def pinsker_tv_bound(kl_bits):
    """``sqrt(D / (2 log2 e))``, an upper bound on TV distance."""
    return math.sqrt(kl_bits / (2.0 * LOG2E))


__all__ = [
    "Channel",
    "Distribution",
    "LOG2E",
    "SequenceAlphabet",
    "binary_entropy",
    "channel_mutual_information",
    "composition_grid",
    "conditional_kl",
    "conditional_mutual_information",
    "entropy",
    "hamming_distance",
    "kl_divergence",
    "mutual_information",
    "pinsker_tv_bound",
    "reverse_markov_bound",
    "tv_distance",
]
