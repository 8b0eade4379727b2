"""Exact and Monte Carlo error evaluation for codes on networks and on N(V, k).

The exact evaluator walks the time steps once for all message vectors at
once, branching only on channel outputs of positive probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import Code, ModifiedCode, message_vectors
from ..validation import ValidationError, check_random_state

DEFAULT_CAP = 2 ** 26


@dataclass(frozen=True, eq=False)
class ErrorReport:
    """Average error probability; ``per_message_success`` is ``P_c(w)`` in row-major order."""

    error_prob: float
    per_message_success: np.ndarray | None
    message_sizes: tuple
    exact: bool = True
    ci: tuple | None = None
    samples: int | None = None

    @property
    def success_prob(self):
        return 1.0 - self.error_prob

    def message_vector(self, rank):
        return tuple(int(v) for v in np.unravel_index(rank, self.message_sizes))


@dataclass(frozen=True, eq=False)
class PathTable:
    """All positive-probability output histories, one row per (message vector, history).

    ``msg`` indexes ``messages``; ``prob`` is conditional on the message vector;
    ``hist[:, j]`` is the rank of node ``j``'s output history; ``bits`` is the pipe
    content received by the end (0 for base codes).
    """

    messages: np.ndarray
    msg: np.ndarray
    prob: np.ndarray
    hist: np.ndarray
    bits: np.ndarray


def _all_messages(sizes):
    return np.array(list(message_vectors(sizes)), dtype=np.int64).reshape(-1, len(sizes))


def _branch_bound(net, n, count):
    per_row = int((net.kernel > 0).sum(axis=1).max())
    return count * per_row ** n


def enumerate_paths(net, n, encoders, message_sizes, *, modified=None, relay=None, cap=DEFAULT_CAP,
                    messages=None):
    """Exact path enumeration; pass ``modified``/``relay`` for codes on N(V, k)."""
    msgs = _all_messages(message_sizes) if messages is None else np.asarray(messages, dtype=np.int64)
    if _branch_bound(net, n, len(msgs)) > cap:
        raise ValidationError(
            f"enumeration cap exceeded ({len(msgs)} message vectors x channel branches > {cap}); "
            "use Monte Carlo mode with samples and seed"
        )
    d = net.d
    out_sizes = np.array(net.out_sizes, dtype=np.int64)
    kernel = net.kernel
    v_nodes = modified.v_nodes if modified is not None else ()
    v_set = set(v_nodes)
    if modified is not None:
        wv_rank = np.zeros(len(msgs), dtype=np.int64)
        for i in v_nodes:
            wv_rank = wv_rank * message_sizes[i] + msgs[:, i]
        yv_sizes = [net.out_sizes[i] for i in v_nodes]
    idx = np.arange(len(msgs))
    prob = np.ones(len(msgs))
    hist = np.zeros((len(msgs), d), dtype=np.int64)
    bits = np.zeros(len(msgs), dtype=np.int64)
    yv_hist = np.zeros(len(msgs), dtype=np.int64)
    for t in range(n):
        xs = []
        for i in range(d):
            tab = np.asarray(encoders[i][t])
            if i in v_set:
                xs.append(tab[msgs[idx, i], hist[:, i], bits])
            else:
                xs.append(tab[msgs[idx, i], hist[:, i]])
        xr = np.ravel_multi_index(tuple(xs), net.in_sizes)
        rows = kernel[xr]
        s, y = np.nonzero(rows > 0)
        idx, prob = idx[s], prob[s] * rows[s, y]
        ys = np.array(np.unravel_index(y, net.out_sizes)).T.reshape(len(y), d)
        hist = hist[s] * out_sizes + ys
        bits = bits[s]
        if modified is not None:
            yv = np.zeros(len(y), dtype=np.int64)
            for i, size in zip(v_nodes, yv_sizes):
                yv = yv * size + ys[:, i]
            yv_hist = yv_hist[s] * int(np.prod(yv_sizes, dtype=np.int64)) + yv
            emit = np.asarray(relay[t])[wv_rank[idx], yv_hist]
            bits = (bits << modified.schedule[t]) | emit
        if len(idx) > cap:
            raise ValidationError("enumeration cap exceeded during path expansion")
    return PathTable(msgs, idx, prob, hist, bits)


def _correct_mask(paths, decoders, v_set=frozenset()):
    ok = np.ones(len(paths.msg), dtype=bool)
    m = paths.messages[paths.msg]
    for (i, j), tab in decoders.items():
        tab = np.asarray(tab)
        if j in v_set:
            est = tab[m[:, j], paths.hist[:, j], paths.bits]
        else:
            est = tab[m[:, j], paths.hist[:, j]]
        ok &= est == m[:, i]
    return ok


def _report(paths, ok, sizes):
    pc = np.bincount(paths.msg, weights=paths.prob * ok, minlength=len(paths.messages))
    pc = np.clip(pc, 0.0, 1.0)
    pc.setflags(write=False)
    return ErrorReport(float(min(max(1.0 - pc.mean(), 0.0), 1.0)), pc, tuple(sizes))


def exact_error_probability(net, code, cap=DEFAULT_CAP):
    """Average error over uniform message vectors, with ``P_c(w)`` per message vector."""
    if isinstance(code, ModifiedCode):
        return evaluate_modified_code(code, cap)
    code = code.validate_for(net)
    paths = enumerate_paths(net, code.n, code.encoders, code.message_sizes, cap=cap)
    return _report(paths, _correct_mask(paths, code.decoders), code.message_sizes)


def evaluate_modified_code(mcode, cap=DEFAULT_CAP):
    mcode = mcode.validate()
    mn = mcode.network
    paths = enumerate_paths(mn.base, mcode.n, mcode.encoders, mcode.message_sizes,
                            modified=mn, relay=mcode.relay, cap=cap)
    return _report(paths, _correct_mask(paths, mcode.decoders, mn.v_set), mcode.message_sizes)


def monte_carlo_error_probability(net, code, samples, seed):
    """Seeded Monte Carlo estimate with a 95% normal-approximation interval."""
    code = code.validate_for(net)
    if samples < 1:
        raise ValidationError("Monte Carlo mode needs samples >= 1")
    rng = check_random_state(seed)
    d = net.d
    msgs = np.stack([rng.integers(0, m, samples) for m in code.message_sizes], axis=1)
    hist = np.zeros((samples, d), dtype=np.int64)
    out_sizes = np.array(net.out_sizes, dtype=np.int64)
    cdf = np.cumsum(net.kernel, axis=1)
    for t in range(code.n):
        xs = [np.asarray(code.encoders[i][t])[msgs[:, i], hist[:, i]] for i in range(d)]
        xr = np.ravel_multi_index(tuple(xs), net.in_sizes)
        u = rng.random(samples)
        y = np.minimum((u[:, None] >= cdf[xr]).sum(axis=1), cdf.shape[1] - 1)
        ys = np.array(np.unravel_index(y, net.out_sizes)).T.reshape(samples, d)
        hist = hist * out_sizes + ys
    ok = np.ones(samples, dtype=bool)
    for (i, j), tab in code.decoders.items():
        ok &= np.asarray(tab)[msgs[:, j], hist[:, j]] == msgs[:, i]
    err = 1.0 - ok.mean()
    half = 1.96 * math.sqrt(max(err * (1 - err), 0.0) / samples)
    return ErrorReport(float(err), None, code.message_sizes, exact=False,
                       ci=(max(err - half, 0.0), min(err + half, 1.0)), samples=samples)


@dataclass(frozen=True)
class GoodMessageSet:
    members: tuple
    threshold: float
    size: int
    required: float
    certificate_holds: bool


def good_message_set(report, epsilon):
    """Message vectors with ``P_c(w) >= (1 - epsilon) / 2`` and the size certificate."""
    if report.per_message_success is None:
        raise ValidationError("good_message_set: report has no per-message success table")
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError("good_message_set: epsilon must lie in [0, 1]")
    thr = (1.0 - epsilon) / 2.0
    pc = report.per_message_success
    ranks = np.flatnonzero(pc >= thr - 1e-12)
    members = tuple(report.message_vector(r) for r in ranks)
    required = pc.size * (1.0 - epsilon) / 2.0
    return GoodMessageSet(members, thr, len(members), required, len(members) >= required - 1e-9)


__all__ = [
    "Code",
    "ErrorReport",
    "GoodMessageSet",
    "PathTable",
    "enumerate_paths",
    "evaluate_modified_code",
    "exact_error_probability",
    "good_message_set",
    "monte_carlo_error_probability",
]
