"""Finite-blocklength code search.

Exhaustive mode enumerates every encoder family and pairs it with the best
decoders; with a single demand pair that is the MAP decoder, otherwise all
decoders but the last are enumerated and the last is MAP given the rest.
Random mode uses seeded restarts and greedy single-entry encoder moves.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from ..core import Code
from ..validation import ValidationError, check_random_state
from .evaluation import DEFAULT_CAP, ErrorReport, _correct_mask, _report, enumerate_paths

DEFAULT_BUDGET = 2 ** 16


def encoder_shapes(net, n, message_sizes):
    """``[(node, t, shape, alphabet)]`` for every encoding table."""
    return [
        (i, t, (message_sizes[i], net.out_sizes[i] ** t), net.in_sizes[i])
        for i in range(net.d) for t in range(n)
    ]


def decoder_shapes(net, n, message_sizes):
    return [
        ((i, j), (message_sizes[j], net.out_sizes[j] ** n), message_sizes[i])
        for (i, j) in net.demand_pairs
    ]


def _space_size(shapes):
    return math.prod(a ** math.prod(s) for *_, s, a in shapes)


def _tables_from_flat(shapes, flat):
    tabs, pos = [], 0
    for *_, shape, _ in shapes:
        size = math.prod(shape)
        tabs.append(np.asarray(flat[pos:pos + size], dtype=np.int64).reshape(shape))
        pos += size
    return tabs


def _digits(index, base, count):
    out = np.zeros(count, dtype=np.int64)
    for p in range(count - 1, -1, -1):
        index, out[p] = divmod(index, base)
    return out


def _encoders_nested(net, n, tabs):
    return tuple(tuple(tabs[i * n + t] for t in range(n)) for i in range(net.d))


def _map_decoder(paths, pair, message_sizes, ysize, others_ok):
    """MAP table for ``pair`` given which paths the other decoders get right."""
    i, j = pair
    m = paths.messages[paths.msg]
    w = paths.prob * others_ok
    acc = np.zeros((message_sizes[j], ysize, message_sizes[i]))
    np.add.at(acc, (m[:, j], paths.hist[:, j], m[:, i]), w)
    return np.argmax(acc, axis=2)


def best_decoders(net, n, message_sizes, paths, budget=DEFAULT_BUDGET):
    """Optimal decoders for fixed encoders (exact)."""
    shapes = decoder_shapes(net, n, message_sizes)
    if not shapes:
        return {}
    *rest, last = shapes
    if _space_size([(None, s, a) for _, s, a in rest]) > budget:
        raise ValidationError("infeasible sizes: too many joint decoder combinations")
    best, best_val = None, -1.0
    rest_spaces = [range(a ** math.prod(s)) for _, s, a in rest]
    for combo in product(*rest_spaces):
        decs = {}
        for (pair, shape, a), code_idx in zip(rest, combo):
            decs[pair] = _digits(code_idx, a, math.prod(shape)).reshape(shape)
        ok = _correct_mask(paths, decs)
        pair, shape, _ = last
        decs[pair] = _map_decoder(paths, pair, message_sizes, shape[1], ok)
        val = float(np.bincount(paths.msg, weights=paths.prob * _correct_mask(paths, decs)).sum())
        if val > best_val:
            best, best_val = decs, val
    return best


def _evaluate(net, n, message_sizes, enc, budget, cap):
    paths = enumerate_paths(net, n, enc, message_sizes, cap=cap)
    decs = best_decoders(net, n, message_sizes, paths, budget)
    rep = _report(paths, _correct_mask(paths, decs), message_sizes)
    return decs, rep


def search_best_code(net, n, message_sizes, budget=DEFAULT_BUDGET, seed=None, mode="exhaustive",
                     restarts=20, passes=5, cap=DEFAULT_CAP):
    """Return ``(Code, ErrorReport)`` with the smallest error found."""
    message_sizes = tuple(int(m) for m in message_sizes)
    if len(message_sizes) != net.d or any(m < 1 for m in message_sizes) or n < 1:
        raise ValidationError("infeasible sizes: need n >= 1 and one message size >= 1 per node")
    shapes = encoder_shapes(net, n, message_sizes)
    dec_shapes = decoder_shapes(net, n, message_sizes)
    n_dec = _space_size([(None, s, a) for _, s, a in dec_shapes[:-1]])
    best = None

    def consider(flat):
        nonlocal best
        enc = _encoders_nested(net, n, _tables_from_flat(shapes, flat))
        decs, rep = _evaluate(net, n, message_sizes, enc, budget, cap)
        if best is None or rep.error_prob < best[2].error_prob:
            best = (enc, decs, rep)
        return rep.error_prob

    if mode == "exhaustive":
        total = _space_size(shapes) * n_dec
        if total > budget:
            raise ValidationError(
                f"infeasible sizes: exhaustive space has {total} codes > budget {budget}; use random mode")
        alphabets = [a for *_, s, a in shapes for _ in range(math.prod(s))]
        for flat in product(*(range(a) for a in alphabets)):
            consider(flat)
    elif mode == "random":
        rng = check_random_state(seed)
        alphabets = np.array([a for *_, s, a in shapes for _ in range(math.prod(s))], dtype=np.int64)
        for _ in range(restarts):
            flat = (rng.random(len(alphabets)) * alphabets).astype(np.int64)
            cur = consider(flat)
            for _ in range(passes):
                improved = False
                for pos in range(len(flat)):
                    for v in range(alphabets[pos]):
                        if v == flat[pos]:
                            continue
                        trial = flat.copy()
                        trial[pos] = v
                        e = consider(trial)
                        if e < cur - 1e-15:
                            flat, cur, improved = trial, e, True
                if not improved:
                    break
    else:
        raise ValidationError(f"unknown search mode {mode!r}")
    enc, decs, rep = best
    return Code(n, message_sizes, enc, decs), rep


__all__ = ["ErrorReport", "best_decoders", "decoder_shapes", "encoder_shapes", "search_best_code"]
