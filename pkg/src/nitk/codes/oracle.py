"""Independent brute-force reference for the code search.

Shares nothing with the main evaluator: every encoder and every decoder table
is enumerated, and each code is scored by plain recursion over time in exact
rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def _unrank(r, sizes):
    out = []
    for s in reversed(sizes):
        r, v = divmod(r, s)
        out.append(v)
    return tuple(reversed(out))


def _rank(vals, sizes):
    r = 0
    for v, s in zip(vals, sizes):
        r = r * s + v
    return r


def _success(net, n, sizes, enc, dec, kernel):
    in_sizes, out_sizes = net.in_sizes, net.out_sizes
    d = net.d
    pairs = sorted(dec)
    total = Fraction(0)
    msgs = list(product(*(range(m) for m in sizes)))

    def walk(w, t, hists, p):
        if t == n:
            for (i, j) in pairs:
                if dec[(i, j)][(w[j], hists[j])] != w[i]:
                    return Fraction(0)
            return p
        xs = tuple(enc[(i, t)][(w[i], hists[i])] for i in range(d))
        row = kernel[_rank(xs, in_sizes)]
        acc = Fraction(0)
        for yr, q in enumerate(row):
            if q == 0:
                continue
            ys = _unrank(yr, out_sizes)
            nh = tuple(h * out_sizes[i] + ys[i] for i, h in enumerate(hists))
            acc += walk(w, t + 1, nh, p * q)
        return acc

    for w in msgs:
        total += walk(w, 0, (0,) * d, Fraction(1))
    return total / len(msgs)


def brute_force_min_error(net, n, message_sizes):
    """Minimum average error over all codes, as an exact ``Fraction``."""
    sizes = tuple(int(m) for m in message_sizes)
    kernel = [[Fraction(float(v)) for v in row] for row in net.kernel]
    enc_keys = [((i, t), [(w, h) for w in range(sizes[i]) for h in range(net.out_sizes[i] ** t)],
                 net.in_sizes[i]) for i in range(net.d) for t in range(n)]
    dec_keys = [((i, j), [(w, h) for w in range(sizes[j]) for h in range(net.out_sizes[j] ** n)],
                 sizes[i]) for (i, j) in net.demand_pairs]

    def assignments(keys):
        slots = [(name, cell, a) for name, cells, a in keys for cell in cells]
        for vals in product(*(range(a) for _, _, a in slots)):
            tabs = {name: {} for name, _, _ in keys}
            for (name, cell, _), v in zip(slots, vals):
                tabs[name][cell] = v
            yield tabs

    best = Fraction(0)
    for enc in assignments(enc_keys):
        for dec in assignments(dec_keys):
            s = _success(net, n, sizes, enc, dec, kernel)
            if s > best:
                best = s
    return 1 - best


def oracle_space_size(net, n, message_sizes):
    size = 1
    for i in range(net.d):
        for t in range(n):
            size *= net.in_sizes[i] ** (message_sizes[i] * net.out_sizes[i] ** t)
    for (i, j) in net.demand_pairs:
        size *= message_sizes[i] ** (message_sizes[j] * net.out_sizes[j] ** n)
    return size


__all__ = ["brute_force_min_error", "oracle_space_size"]
