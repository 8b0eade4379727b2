"""Removing the extra edge by guessing its content.

Every node pretends the pipe carried a fixed string ``x*``; trying all ``2^k``
strings and keeping the best yields a base-network code whose error is at
most ``1 - (1 - eps) 2^-k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Code, ModifiedCode
from ..validation import ValidationError
from .evaluation import DEFAULT_CAP, evaluate_modified_code, exact_error_probability


def lemma1_bound(epsilon, k):
    return 1.0 - (1.0 - epsilon) * 2.0 ** (-k)


def fix_pipe_content(mcode, x_star):
    """The base code in which every node assumes the pipe delivered ``x_star``."""
    mn = mcode.network
    if not 0 <= x_star < 2 ** mn.k:
        raise ValidationError(f"pipe content {x_star} outside [0, 2^{mn.k})")
    encs = []
    for i in range(mn.base.d):
        tabs = []
        for t in range(mcode.n):
            e = np.asarray(mcode.encoders[i][t])
            if i in mn.v_set:
                e = e[..., x_star >> (mn.k - mn.bits_before(t))]
            tabs.append(e)
        encs.append(tuple(tabs))
    decs = {}
    for (i, j), tab in mcode.decoders.items():
        tab = np.asarray(tab)
        decs[(i, j)] = tab[..., x_star] if j in mn.v_set else tab
    return Code(mcode.n, mcode.message_sizes, tuple(encs), decs)


@dataclass(frozen=True, eq=False)
class Lemma1Result:
    code: Code
    report: object
    x_star: int
    modified_error: float
    errors_by_x: tuple
    bound: float

    @property
    def within_bound(self):
        return self.report.error_prob <= self.bound + 1e-12


def lemma1_transform(net, v_set, k, code_on_modified, cap=DEFAULT_CAP):
    """Best fixed-pipe base code, its report, and the guaranteed bound."""
    if not isinstance(code_on_modified, ModifiedCode):
        raise ValidationError("code/modified-network mismatch: expected a code on N(V, k)")
    mn = code_on_modified.network
    if mn.base != net or mn.v_set != frozenset(v_set) or mn.k != k:
        raise ValidationError("code/modified-network mismatch: network, v_set or k differ")
    mcode = code_on_modified.validate()
    eps = evaluate_modified_code(mcode, cap).error_prob
    best = None
    errs = []
    for x in range(2 ** k):
        code = fix_pipe_content(mcode, x)
        rep = exact_error_probability(net, code, cap)
        errs.append(rep.error_prob)
        if best is None or rep.error_prob < best[1].error_prob:
            best = (code, rep, x)
    return Lemma1Result(best[0], best[1], best[2], eps, tuple(errs), lemma1_bound(eps, k))


__all__ = ["Lemma1Result", "fix_pipe_content", "lemma1_bound", "lemma1_transform"]
