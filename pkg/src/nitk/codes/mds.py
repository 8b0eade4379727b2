"""Pipelining N repetitions of an inner code under an (N, N-2) MDS outer code.

The outer code is a Reed-Solomon evaluation code over the smallest GF(2^m)
with at least N elements, in systematic form, decoded by a single-error
syndrome table. A block fails when two or more inner repetitions fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..validation import ValidationError, check_random_state
from .gf import PRIMITIVE, GF2m


def mds_formula(eps, N):
    return 1.0 - (1.0 - eps) ** N - N * eps * (1.0 - eps) ** (N - 1)


@dataclass(frozen=True, eq=False)
class MDSPipelineSpec:
    N: int
    field_order: int
    generator: np.ndarray
    parity_check: np.ndarray
    inner_code: object = None

    @property
    def dimension(self):
        return self.N - 2


class MDSCode:
    """Systematic ``(N, N - 2)`` Reed-Solomon code correcting one symbol error."""

    def __init__(self, N):
        if N < 3:
            raise ValidationError("no MDS code of requested parameters: need N >= 3")
        m = max(1, math.ceil(math.log2(N)))
        if m not in PRIMITIVE:
            raise ValidationError(f"no MDS code of requested parameters: N = {N} too large")
        self.gf = GF2m(m)
        self.N, self.K = N, N - 2
        points = [0] + [int(self.gf.exp[i]) for i in range(N - 1)]
        V = np.array([[self.gf.pow(a, j) for a in points] for j in range(self.K)], dtype=np.int64)
        G = self.gf.row_reduce(V)
        if not np.array_equal(G[:, :self.K], np.eye(self.K, dtype=np.int64)):
            raise ValidationError("no MDS code of requested parameters: generator not systematic")
        self.G = G
        P = G[:, self.K:]
        # char 2: H = [P^T | I]
        self.H = np.concatenate([P.T, np.eye(2, dtype=np.int64)], axis=1)
        q = self.gf.q
        self._table = np.full(q * q, -1, dtype=np.int64)
        self._table[0] = -2
        for pos in range(N):
            for val in range(1, q):
                s = self.gf.mul(self.H[:, pos], val)
                key = int(s[0]) * q + int(s[1])
                self._table[key] = pos * q + val

    def spec(self, inner_code=None):
        return MDSPipelineSpec(self.N, self.gf.q, self.G, self.H, inner_code)

    def encode(self, msgs):
        return self.gf.matmul(np.atleast_2d(msgs), self.G)

    def syndromes(self, words):
        return self.gf.matmul(np.atleast_2d(words), self.H.T)

    def decode(self, words):
        """Correct at most one symbol error; returns ``(messages, ok)``."""
        w = np.array(np.atleast_2d(words), dtype=np.int64)
        s = self.syndromes(w)
        q = self.gf.q
        entry = self._table[s[:, 0] * q + s[:, 1]]
        fix = entry >= 0
        rows = np.flatnonzero(fix)
        w[rows, entry[rows] // q] ^= entry[rows] % q
        ok = fix | (entry == -2)
        return w[:, :self.K], ok

    def minimum_distance(self):
        """Exhaustive over nonzero messages (small fields only)."""
        q = self.gf.q
        if q ** self.K > 2 ** 20:
            raise ValidationError(f"minimum_distance: {q}^{self.K} messages is too many to enumerate")
        best = self.N
        for r in range(1, q ** self.K):
            msg = np.array([(r // q ** i) % q for i in range(self.K)], dtype=np.int64)
            best = min(best, int(np.count_nonzero(self.encode(msg))))
        return best


@dataclass(frozen=True)
class MDSResult:
    N: int
    eps: float
    field_order: int
    formula_error: float
    empirical_error: float
    ci: tuple
    sigma: float
    trials: int

    @property
    def within_3_sigma(self):
        return abs(self.empirical_error - self.formula_error) <= 3 * self.sigma + 1e-15


def mds_pipeline(inner_error, N, seed, trials=100_000):
    """Simulate ``N`` independent inner repetitions failing w.p. ``inner_error`` each."""
    if not 0.0 <= inner_error <= 1.0:
        raise ValidationError("inner error probability must lie in [0, 1]")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    code = MDSCode(N)
    rng = check_random_state(seed)
    q = code.gf.q
    msgs = rng.integers(0, q, (trials, code.K))
    words = code.encode(msgs)
    fail = rng.random((trials, N)) < inner_error
    noise = rng.integers(1, q, (trials, N))
    received = words ^ np.where(fail, noise, 0)
    dec, ok = code.decode(received)
    wrong = ~ok | np.any(dec != msgs, axis=1)
    emp = float(wrong.mean())
    f = mds_formula(inner_error, N)
    sigma = math.sqrt(f * (1 - f) / trials)
    half = 1.96 * math.sqrt(emp * (1 - emp) / trials)
    return MDSResult(N, float(inner_error), q, f, emp, (max(emp - half, 0.0), min(emp + half, 1.0)),
                     sigma, trials)


__all__ = ["MDSCode", "MDSPipelineSpec", "MDSResult", "mds_formula", "mds_pipeline"]
