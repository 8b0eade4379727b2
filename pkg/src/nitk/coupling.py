"""Causal blowing-up coupling on finite sequence spaces.

Sequences over ``{0..b-1}^n`` are ranked row-major (first symbol most
significant). Per-time kernels are indexed by the rank of the prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import JointDistribution
from .measures import LOG2E, SequenceAlphabet, tv_distance
from .validation import (
    ValidationError,
    check_probability_vector,
    check_random_state,
    check_same_length,
    renormalize_rows,
)

DEFAULT_JOINT_CAP = 2 ** 20


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkovSource:
    """A length-``n`` source given by kernels ``P_{X_t | X^{t-1}}``.

    ``kernels[t]`` (0-based ``t``) has shape ``(base_size ** t, base_size)``.
    """

    n: int
    base_size: int
    kernels: tuple

    def __post_init__(self):
        if self.n < 1 or self.base_size < 1:
            raise ValidationError("source: need n >= 1 and base_size >= 1")
        if len(self.kernels) != self.n:
            raise ValidationError(f"source: expected {self.n} kernels, got {len(self.kernels)}")
        ks = []
        for t, k in enumerate(self.kernels):
            k = np.asarray(k, dtype=float)
            want = (self.base_size ** t, self.base_size)
            if k.shape != want:
                raise ValidationError(f"source: kernel {t} has shape {k.shape}, expected {want}")
            ks.append(_freeze(renormalize_rows(k, name=f"source kernel {t}")))
        object.__setattr__(self, "kernels", tuple(ks))

    @property
    def alphabet(self):
        return SequenceAlphabet(self.base_size, self.n)

    def sequence_pmf(self):
        pmf = np.ones(1)
        for k in self.kernels:
            pmf = (pmf[:, None] * k).ravel()
        return pmf

    def probability(self, A):
        return float(self.sequence_pmf()[A.membership].sum())

    @classmethod
    def iid(cls, dist, n):
        p = check_probability_vector(dist)
        b = p.size
        return cls(n, b, tuple(np.tile(p, (b ** t, 1)) for t in range(n)))

    @classmethod
    def markov_chain(cls, initial, transition, n):
        """First-order chain: ``X_1 ~ initial``, ``X_t | X_{t-1} ~ transition``."""
        p0 = check_probability_vector(initial, name="initial")
        tr = renormalize_rows(np.asarray(transition, dtype=float), name="transition")
        b = p0.size
        if tr.shape != (b, b):
            raise ValidationError("markov chain: transition must be square and match initial")
        ks = [p0[None, :]]
        for t in range(1, n):
            last = np.arange(b ** t) % b
            ks.append(tr[last])
        return cls(n, b, tuple(ks))

    @classmethod
    def from_sequence_pmf(cls, pmf, base_size, n, fallback=None):
        """Factor a sequence pmf into kernels; zero-mass prefixes take ``fallback``'s kernel."""
        pmf = check_probability_vector(pmf, name="sequence pmf")
        if pmf.size != base_size ** n:
            raise ValidationError("sequence pmf: dimension mismatch")
        ks = []
        for t in range(n):
            nxt = pmf.reshape(base_size ** (t + 1), -1).sum(axis=1).reshape(base_size ** t, base_size)
            mass = nxt.sum(axis=1, keepdims=True)
            if fallback is not None:
                default = fallback.kernels[t]
            else:
                default = np.full_like(nxt, 1.0 / base_size)
            with np.errstate(invalid="ignore", divide="ignore"):
                k = np.where(mass > 0, nxt / np.where(mass > 0, mass, 1.0), default)
            ks.append(k / k.sum(axis=1, keepdims=True))
        return cls(n, base_size, tuple(ks))


@dataclass(frozen=True, eq=False)
class EventSet:
    """Subset of ``{0..b-1}^n`` stored as a boolean membership vector over ranks."""

    n: int
    base_size: int
    membership: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.membership, dtype=bool)
        if m.shape != (self.base_size ** self.n,):
            raise ValidationError("event set: membership length must be base_size ** n")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "membership", m)

    def __len__(self):
        return int(self.membership.sum())

    def __contains__(self, seq):
        return bool(self.membership[SequenceAlphabet(self.base_size, self.n).rank(seq)])

    def __eq__(self, other):
        return (isinstance(other, EventSet) and self.n == other.n and self.base_size == other.base_size
                and np.array_equal(self.membership, other.membership))

    def sequences(self):
        return [tuple(int(v) for v in s) for s in SequenceAlphabet(self.base_size, self.n).all_sequences()[self.membership]]

    @classmethod
    def from_sequences(cls, seqs, base_size, n):
        alph = SequenceAlphabet(base_size, n)
        m = np.zeros(alph.size, dtype=bool)
        for s in seqs:
            if len(s) != n or any(not 0 <= int(v) < base_size for v in s):
                raise ValidationError(f"event set: invalid sequence {tuple(s)}")
            m[alph.rank(s)] = True
        return cls(n, base_size, m)

    @classmethod
    def from_ranks(cls, ranks, base_size, n):
        m = np.zeros(base_size ** n, dtype=bool)
        m[np.asarray(list(ranks), dtype=np.int64)] = True
        return cls(n, base_size, m)

    @classmethod
    def full(cls, base_size, n):
        return cls(n, base_size, np.ones(base_size ** n, dtype=bool))

    @classmethod
    def hamming_ball(cls, center, radius, base_size):
        return blowup_set(cls.from_sequences([center], base_size, len(center)), radius)


@dataclass(frozen=True, eq=False)
class CouplingKernel:
    """``tables[t][z_prefix_rank, y_t, z_t] = P(Z_t = z_t | Y_t = y_t, Z^{t-1})``."""

    n: int
    base_size: int
    tables: tuple

    def __post_init__(self):
        b = self.base_size
        for t, tab in enumerate(self.tables):
            if np.asarray(tab).shape != (b ** t, b, b):
                raise ValidationError(f"coupling kernel: table {t} has wrong shape")


def tilted_distribution(src, A):
    """The source conditioned on ``A``, refactored into per-time kernels."""
    _check_pair(src, A)
    pmf = src.sequence_pmf()
    pa = float(pmf[A.membership].sum())
    if pa <= 0:
        raise ValidationError("tilted distribution: P(A) = 0")
    tilted = np.where(A.membership, pmf, 0.0) / pa
    return MarkovSource.from_sequence_pmf(tilted, src.base_size, src.n, fallback=src)


def maximal_coupling(P, Q):
    """Joint with marginals ``P`` (rows) and ``Q`` (columns) and mismatch ``d_TV(P, Q)``."""
    p = check_probability_vector(P, name="P")
    q = check_probability_vector(Q, name="Q")
    check_same_length(p, q, "maximal_coupling")
    common = np.minimum(p, q)
    joint = np.diag(common)
    ep = p - common
    eq = q - common
    tv = ep.sum()
    if tv > 0:
        joint = joint + np.outer(ep, eq) / tv
    return JointDistribution(joint)


def _check_pair(src, A):
    if src.n != A.n or src.base_size != A.base_size:
        raise ValidationError("source and event set live on different sequence spaces")


def causal_blowup_coupling(src, A):
    """Kernels ``P_{Z_t | Y_t, Z^{t-1}}`` from per-prefix maximal couplings."""
    tilt = tilted_distribution(src, A)
    b = src.base_size
    eye = np.eye(b)
    tmass = np.ones(1)
    tables = []
    for t in range(src.n):
        tab = np.empty((b ** t, b, b))
        for r in range(b ** t):
            p = src.kernels[t][r]
            if tmass[r] <= 0:
                tab[r] = eye  # unreachable prefix: copy through
                continue
            joint = maximal_coupling(p, tilt.kernels[t][r]).table
            with np.errstate(invalid="ignore", divide="ignore"):
                tab[r] = np.where(p[:, None] > 0, joint / np.where(p > 0, p, 1.0)[:, None], eye)
        tables.append(tab)
        tmass = (tmass[:, None] * tilt.kernels[t]).ravel()
    return CouplingKernel(src.n, b, tuple(tables))


def coupled_joint(src, kernel):
    """Exact joint of ``(Y^n, Z^n)`` as a ``(b^n, b^n)`` array (rows ``y``)."""
    b = src.base_size
    J = np.ones((1, 1))
    for t in range(src.n):
        F = src.kernels[t][:, :, None] * kernel.tables[t]
        J = np.einsum("ac,cbd->abcd", J, F).reshape(J.shape[0] * b, J.shape[1] * b)
    return J


def _hamming_matrix(b, n):
    seqs = SequenceAlphabet(b, n).all_sequences()
    return (seqs[:, None, :] != seqs[None, :, :]).sum(axis=2)


def blowup_distance_bound(n, prob):
    if prob <= 0:
        return math.inf
    return math.sqrt(n / (2.0 * LOG2E) * max(-math.log2(prob), 0.0))


@dataclass(frozen=True)
class BlowupReport:
    exact_expected_hamming: float | None
    tv_route_expected_hamming: float | None
    bound: float
    z_in_A: bool
    prob_A: float
    z_law_tv: float | None = None
    samples: int | None = None
    ci_low: float | None = None
    ci_high: float | None = None

    @property
    def holds(self):
        if self.exact_expected_hamming is not None:
            return self.z_in_A and self.exact_expected_hamming <= self.bound + 1e-12
        return self.z_in_A and self.ci_low <= self.bound + 1e-12


def _tv_route(src, kernel):
    """Expected Hamming distance as the sum of per-prefix mismatch masses."""
    b = src.base_size
    zmass = np.ones(1)
    total = 0.0
    for t in range(src.n):
        J = src.kernels[t][:, :, None] * kernel.tables[t]
        off = J.sum(axis=(1, 2)) - np.trace(J, axis1=1, axis2=2)
        total += float(zmass @ off)
        zmass = (zmass[:, None] * J.sum(axis=1)).ravel()
    return total


def verify_blowup_bound(src, A, *, cap=DEFAULT_JOINT_CAP, samples=None, seed=None):
    """Check ``Z^n in A`` a.s. and ``E d_H(Y^n, Z^n)`` against the distance bound."""
    _check_pair(src, A)
    pa = src.probability(A)
    if pa <= 0:
        raise ValidationError("verify_blowup_bound: P(A) = 0")
    kernel = causal_blowup_coupling(src, A)
    bound = blowup_distance_bound(src.n, pa)
    b, n = src.base_size, src.n
    if samples is None:
        if b ** (2 * n) > cap:
            raise ValidationError(
                f"enumeration cap exceeded ({b}^(2*{n}) joint states > {cap}); "
                "use Monte Carlo mode with samples and seed"
            )
        J = coupled_joint(src, kernel)
        ed = float((J * _hamming_matrix(b, n)).sum())
        zlaw = J.sum(axis=0)
        tilt = np.where(A.membership, src.sequence_pmf(), 0.0) / pa
        return BlowupReport(
            ed, _tv_route(src, kernel), bound, bool(np.all(zlaw[~A.membership] == 0.0)), pa,
            z_law_tv=tv_distance(zlaw / zlaw.sum(), tilt),
        )
    if samples < 2:
        raise ValidationError("Monte Carlo mode needs samples >= 2")
    rng = check_random_state(seed)
    y, z = sample_coupled(src, kernel, samples, rng)
    d = (y != z).sum(axis=1)
    mean = float(d.mean())
    half = 1.96 * float(d.std(ddof=1)) / math.sqrt(samples)
    ranks = np.zeros(samples, dtype=np.int64)
    for t in range(n):
        ranks = ranks * b + z[:, t]
    return BlowupReport(None, None, bound, bool(A.membership[ranks].all()), pa,
                        samples=samples, ci_low=mean - half, ci_high=mean + half)


def sample_coupled(src, kernel, size, rng):
    """Draw ``size`` pairs ``(Y^n, Z^n)``; returns two ``(size, n)`` int arrays."""
    b = src.base_size
    y = np.zeros((size, src.n), dtype=np.int64)
    z = np.zeros((size, src.n), dtype=np.int64)
    prefix = np.zeros(size, dtype=np.int64)
    for t in range(src.n):
        py = src.kernels[t][prefix]
        y[:, t] = _draw(py, rng)
        pz = kernel.tables[t][prefix, y[:, t]]
        z[:, t] = _draw(pz, rng)
        prefix = prefix * b + z[:, t]
    return y, z


def _draw(rows, rng):
    u = rng.random(rows.shape[0])
    c = np.cumsum(rows, axis=1)
    return np.minimum((u[:, None] >= c).sum(axis=1), rows.shape[1] - 1)


def blowup_set(A, ell):
    """All sequences within Hamming distance ``ell`` of some member of ``A``."""
    if ell < 0:
        raise ValidationError("blowup_set: radius must be >= 0")
    b, n = A.base_size, A.n
    seqs = SequenceAlphabet(b, n).all_sequences()
    weights = b ** np.arange(n - 1, -1, -1)
    cur = A.membership.copy()
    for _ in range(min(int(ell), n)):
        nxt = cur.copy()
        for p in range(n):
            for s in range(b):
                shift = (s - seqs[:, p]) * weights[p]
                nxt[(np.arange(cur.size) + shift)[cur]] = True
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return EventSet(n, b, cur)


@dataclass(frozen=True)
class CorollaryCheck:
    ell: int
    prob_blown_up: Fraction | float
    lower_bound: float

    @property
    def holds(self):
        return float(self.prob_blown_up) >= self.lower_bound - 1e-12


def blowup_corollary(src, A, ell, exact=False):
    """``P(A_ell)`` against ``1 - bound / ell`` for an independent source."""
    if ell < 1:
        raise ValidationError("blowup_corollary: need ell >= 1")
    blown = blowup_set(A, ell)
    pmf = src.sequence_pmf()
    if exact:
        prob = sum((Fraction(float(v)) for v in pmf[blown.membership]), Fraction(0))
    else:
        prob = float(pmf[blown.membership].sum())
    return CorollaryCheck(int(ell), prob, 1.0 - blowup_distance_bound(src.n, src.probability(A)) / ell)


__all__ = [
    "BlowupReport",
    "CorollaryCheck",
    "CouplingKernel",
    "EventSet",
    "MarkovSource",
    "blowup_corollary",
    "blowup_distance_bound",
    "blowup_set",
    "causal_blowup_coupling",
    "coupled_joint",
    "maximal_coupling",
    "sample_coupled",
    "tilted_distribution",
    "verify_blowup_bound",
]
