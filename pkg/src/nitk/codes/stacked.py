"""Desk-scale simulation of the stacked correction and hashing protocol.

``N`` layers run the same ``n``-step code side by side. After each time step
node ``a`` sees the outputs at ``V`` and, layer by layer, replaces them with a
draw from a causal coupling whose output lands in the good set ``Q(w)``. Every
replaced layer costs ``ceil(log2 N|Y_V|) + 1`` bits and each phase ends with a
stop bit. Nodes outside ``V`` decode from their raw outputs with the help of
hashes of the whole message vectors (delivered by a genie, but charged).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ..coupling import EventSet, MarkovSource, causal_blowup_coupling
from ..validation import ValidationError, check_random_state
from .binning import binning_k
from .evaluation import _correct_mask, enumerate_paths, exact_error_probability, good_message_set

DEFAULT_SEQ_CAP = 2 ** 20
DEFAULT_CANDIDATE_CAP = 100_000


def gamma_n(epsilon, n):
    """``(-log2((1 - eps) / 4) / n) ** (1/4)``."""
    if not 0.0 <= epsilon < 1.0:
        raise ValidationError("gamma_n: need 0 <= eps < 1")
    return (-math.log2((1.0 - epsilon) / 4.0) / n) ** 0.25


def e1_bound_layers(gamma, delta, N, yv_size):
    """Markov-inequality bound on the correction overflow for a given ``N``."""
    return (gamma * (math.ceil(math.log2(N * yv_size)) + 1)) / delta + 1.0 / (delta * N * gamma)


def e1_bound(gamma, delta, yv_size):
    """The same bound after substituting ``N = gamma^-2``."""
    return gamma / delta * (-2.0 * math.log2(gamma) + math.log2(yv_size) + 3.0)


def phase_bits(changed, N, yv_size):
    """Bits for one correction phase: a flagged address per changed layer plus a stop bit."""
    return changed * (math.ceil(math.log2(N * yv_size)) + 1) + 1


@dataclass(frozen=True, eq=False)
class MessageModel:
    """Per-message law of ``Y_V^n``, the good set ``Q(w)`` and the coupling kernels."""

    w: tuple
    pmf: np.ndarray
    pc: np.ndarray
    good: np.ndarray
    kernel: object


@dataclass(frozen=True)
class StackedSimReport:
    n: int
    epsilon_n: float
    gamma_n: float
    N: int
    N_nominal: int
    N_overridden: bool
    delta: float
    runs: int
    correction_budget: float
    correction_bits_used: tuple
    mean_correction_bits: float
    stop_bits: int
    phase_bits: tuple
    changed_layers: tuple
    hash_bits_per_message: int
    hash_bits: int
    coordination_bits: int
    e1_count: int
    e1_rate: float
    e1_sigma: float
    e1_bound: float
    e1_bound_at_N: float
    e2_count: int
    e3_count: int
    hash_bound: float
    truncated: int
    z_outside_q: int
    decode_errors: int
    decode_error_rate: float
    layer_error_rate: float

    @property
    def bound_comparable(self):
        """The ``N = gamma^-2`` form of the bound only applies without an override."""
        return not self.N_overridden

    @property
    def e1_within_bound(self):
        ref = self.e1_bound if self.bound_comparable else self.e1_bound_at_N
        return self.e1_rate <= ref + 3 * self.e1_sigma + 1e-12


def _seq_digits(hist, size, n):
    """Per-time symbols of a history rank (most significant first)."""
    return [(hist // size ** (n - 1 - t)) % size for t in range(n)]


def _message_models(net, code, v_nodes, members, epsilon, cap):
    n = code.n
    yv_sizes = [net.out_sizes[i] for i in v_nodes]
    B = math.prod(yv_sizes)
    if B ** n > cap:
        raise ValidationError(f"stacked: |Y_V|^n = {B ** n} exceeds construction cap {cap}")
    thr = (1.0 - epsilon) / 4.0
    models = {}
    for w in members:
        paths = enumerate_paths(net, n, code.encoders, code.message_sizes, messages=[w])
        ok = _correct_mask(paths, code.decoders)
        seq = np.zeros(len(paths.prob), dtype=np.int64)
        digits = [_seq_digits(paths.hist[:, i], net.out_sizes[i], n) for i in v_nodes]
        for t in range(n):
            sym = np.zeros_like(seq)
            for dg, size in zip(digits, yv_sizes):
                sym = sym * size + dg[t]
            seq = seq * B + sym
        pmf = np.bincount(seq, weights=paths.prob, minlength=B ** n)
        hit = np.bincount(seq, weights=paths.prob * ok, minlength=B ** n)
        with np.errstate(invalid="ignore", divide="ignore"):
            pc = np.where(pmf > 0, hit / np.where(pmf > 0, pmf, 1.0), 0.0)
        good = (pmf > 0) & (pc >= thr - 1e-12)
        src = MarkovSource.from_sequence_pmf(pmf / pmf.sum(), B, n)
        kernel = causal_blowup_coupling(src, EventSet(n, B, good))
        models[w] = MessageModel(w, pmf, pc, good, kernel)
    return models, B


def _hash(key, i, vec, bits):
    h = hashlib.shake_256(key + i.to_bytes(4, "little") + np.asarray(vec, dtype=np.int64).tobytes())
    return int.from_bytes(h.digest((bits + 7) // 8), "little") & ((1 << bits) - 1)


def _hash_decode(costs, budget, target, hasher, cap):
    """Unique layer vector within the Hamming budget whose hash matches ``target``.

    ``costs[l][v]`` is the least Hamming distance from layer ``l``'s output to
    any output the decoder maps to ``v``. Returns ``(vector or None, truncated)``.
    """
    L = len(costs)
    order = [np.argsort(c, kind="stable") for c in costs]
    mins = [float(c.min()) for c in costs]
    tail = np.concatenate([np.cumsum(mins[::-1])[::-1], [0.0]])
    found, visited = [], 0
    vec = [0] * L

    def dfs(l, spent):
        nonlocal visited
        if visited >= cap or len(found) > 1:
            return
        if l == L:
            visited += 1
            if hasher(vec) == target:
                found.append(tuple(vec))
            return
        for v in order[l]:
            c = costs[l][v]
            if spent + c + tail[l + 1] > budget:
                break
            vec[l] = int(v)
            dfs(l + 1, spent + c)

    if tail[0] <= budget:
        dfs(0, 0.0)
    truncated = visited >= cap and len(found) <= 1
    if len(found) == 1 and not truncated:
        return found[0], False
    return None, truncated


def stacked_correction_sim(net, base_code, v_set, delta, seed, *, layers=None, runs=1,
                           seq_cap=DEFAULT_SEQ_CAP, candidate_cap=DEFAULT_CANDIDATE_CAP,
                           coordination_eps=None):
    """Simulate ``runs`` independent stacked blocks and report bit counts and error events."""
    if delta <= 0:
        raise ValidationError("stacked: edge rate delta must be positive")
    if runs < 1:
        raise ValidationError("stacked: runs must be >= 1")
    check_random_state(seed)
    code = base_code.validate_for(net)
    n = code.n
    v_nodes = tuple(sorted(int(i) for i in v_set))
    if not v_nodes or any(i < 0 or i >= net.d for i in v_nodes):
        raise ValidationError("stacked: v_set must be a nonempty set of existing nodes")
    if not net.transmitting_nodes <= set(v_nodes):
        raise ValidationError("stacked: every transmitting node must lie in v_set")
    vc_nodes = tuple(i for i in range(net.d) if i not in v_nodes)

    report = exact_error_probability(net, code)
    eps = report.error_prob
    if eps >= 1.0 - 1e-15:
        raise ValidationError("stacked: base code error probability is 1")
    gam = gamma_n(eps, n)
    N_nominal = max(1, round(gam ** -2))
    N = N_nominal if layers is None else int(layers)
    if N < 1:
        raise ValidationError("stacked: need at least one layer")

    gset = good_message_set(report, eps)
    members = list(gset.members)
    models, B = _message_models(net, code, v_nodes, members, eps, seq_cap)

    L_bits = math.ceil(math.log2(N * B)) + 1
    budget_bits = delta * N * n * gam
    hash_bits = math.ceil(math.sqrt(gam) * n * N)
    d_msgs = len(v_nodes)
    ceps = 1.0 / (n + 1) if coordination_eps is None else coordination_eps
    coord = N * d_msgs * binning_k(d_msgs, ceps, eps)
    ham_budget = N * n * gam

    cdf = np.cumsum(net.kernel, axis=1)
    out_sizes = net.out_sizes
    vc_pairs = [(i, j) for (i, j) in net.demand_pairs if j not in v_nodes]
    v_pairs = [(i, j) for (i, j) in net.demand_pairs if j in v_nodes]
    hamming = {}
    for j in {j for _, j in vc_pairs}:
        size = out_sizes[j] ** n
        dg = np.array(_seq_digits(np.arange(size), out_sizes[j], n)).T
        hamming[j] = (dg[:, None, :] != dg[None, :, :]).sum(axis=2)

    used, phases_all, changed_all = [], [], []
    e1 = e2 = e3 = trunc = outside = block_err = layer_err = 0
    for run in range(runs):
        rng = np.random.default_rng([int(seed), run])
        key = rng.bytes(16)
        picks = rng.integers(0, len(members), N)
        W = np.array([members[p] for p in picks], dtype=np.int64).reshape(N, net.d)
        zh = np.zeros((N, net.d), dtype=np.int64)  # corrected histories at V, raw elsewhere
        yh = np.zeros((N, net.d), dtype=np.int64)  # raw histories
        zpre = np.zeros(N, dtype=np.int64)
        book = {}
        phases, changed = [], []
        for t in range(n):
            xs = [np.asarray(code.encoders[i][t])[W[:, i], zh[:, i]] for i in range(net.d)]
            xr = np.ravel_multi_index(tuple(xs), net.in_sizes)
            u = rng.random(N)
            y = np.minimum((u[:, None] >= cdf[xr]).sum(axis=1), cdf.shape[1] - 1)
            ys = np.array(np.unravel_index(y, out_sizes)).T.reshape(N, net.d)
            yv = np.ravel_multi_index(tuple(ys[:, i] for i in v_nodes), [out_sizes[i] for i in v_nodes])
            zv = np.empty(N, dtype=np.int64)
            for l in range(N):
                w = tuple(int(v) for v in W[l])
                k = (w, t, int(zpre[l]), int(yv[l]))
                if k not in book:
                    row = models[w].kernel.tables[t][k[2], k[3]]
                    book[k] = int(rng.choice(B, p=row / row.sum()))
                zv[l] = book[k]
            ch = int(np.count_nonzero(zv != yv))
            changed.append(ch)
            phases.append(phase_bits(ch, N, B))
            zs = ys.copy()
            zparts = np.unravel_index(zv, [out_sizes[i] for i in v_nodes])
            for pos, i in enumerate(v_nodes):
                zs[:, i] = zparts[pos]
            osz = np.array(out_sizes, dtype=np.int64)
            zh = zh * osz + zs
            yh = yh * osz + ys
            zpre = zpre * B + zv
        total = sum(phases)
        used.append(total)
        phases_all.append(tuple(phases))
        changed_all.append(tuple(changed))
        fired = total > budget_bits
        e1 += fired
        for l in range(N):
            if not models[tuple(int(v) for v in W[l])].good[zpre[l]]:
                outside += 1

        wrong = np.zeros(N, dtype=bool)
        for (i, j) in v_pairs:
            est = np.asarray(code.decoders[(i, j)])[W[:, j], zh[:, j]]
            wrong |= est != W[:, i]
        for (i, j) in vc_pairs:
            dec = np.asarray(code.decoders[(i, j)])
            M = code.message_sizes[i]
            costs = []
            for l in range(N):
                tab = dec[W[l, j]]
                dist = hamming[j][yh[l, j]]
                c = np.full(M, np.inf)
                np.minimum.at(c, tab, dist)
                costs.append(c)
            truth = W[:, i]
            if sum(c[v] for c, v in zip(costs, truth)) > ham_budget:
                e2 += 1

            def hasher(vec, i=i):
                return _hash(key, i, vec, hash_bits)

            got, tr = _hash_decode(costs, ham_budget, hasher(truth), hasher, candidate_cap)
            trunc += tr
            if got is None:
                wrong[:] = True
            else:
                if got != tuple(int(v) for v in truth):
                    e3 += 1
                wrong |= np.array(got) != truth
        layer_err += int(wrong.sum())
        block_err += bool(fired or wrong.any())

    e1_rate = e1 / runs
    return StackedSimReport(
        n=n, epsilon_n=eps, gamma_n=gam, N=N, N_nominal=N_nominal, N_overridden=N != N_nominal,
        delta=float(delta), runs=runs, correction_budget=budget_bits,
        correction_bits_used=tuple(used), mean_correction_bits=float(np.mean(used)),
        stop_bits=n, phase_bits=tuple(phases_all), changed_layers=tuple(changed_all),
        hash_bits_per_message=hash_bits, hash_bits=d_msgs * hash_bits, coordination_bits=coord,
        e1_count=e1, e1_rate=e1_rate, e1_sigma=math.sqrt(e1_rate * (1 - e1_rate) / runs),
        e1_bound=e1_bound(gam, delta, B), e1_bound_at_N=e1_bound_layers(gam, delta, N, B),
        e2_count=e2, e3_count=e3, hash_bound=2.0 ** (-n * N * math.sqrt(gam) / 2),
        truncated=trunc, z_outside_q=outside, decode_errors=block_err,
        decode_error_rate=block_err / runs, layer_error_rate=layer_err / (runs * N),
    )


__all__ = [
    "MessageModel",
    "StackedSimReport",
    "e1_bound",
    "e1_bound_layers",
    "gamma_n",
    "phase_bits",
    "stacked_correction_sim",
]
