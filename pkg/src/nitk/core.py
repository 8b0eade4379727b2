"""Data model: distributions, channels, networks, codes and the edge-added network.

Node indices, message indices and symbols are 0-based throughout. An alphabet
size of 0 denotes an empty alphabet; such a node still carries a single "null"
symbol internally so that every table has a well-defined shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .validation import (
    LOADER_ATOL,
    ValidationError,
    check_probability_vector,
    check_stochastic_matrix,
    renormalize_rows,
)


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """A pmf on ``{0, ..., len(probs) - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(check_probability_vector(self.probs)))

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.probs, other.probs)

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, size, at):
        p = np.zeros(size)
        p[at] = 1.0
        return cls(p)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix ``rows[x, y] = P(y | x)``."""

    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen(check_stochastic_matrix(self.rows)))

    @property
    def n_inputs(self):
        return self.rows.shape[0]

    @property
    def n_outputs(self):
        return self.rows.shape[1]

    def row(self, x):
        return Distribution(self.rows[x])

    def output_distribution(self, input_dist):
        p = check_probability_vector(input_dist, name="input distribution")
        if p.size != self.n_inputs:
            raise ValidationError("input distribution: dimension mismatch with channel")
        return Distribution(p @ self.rows)

    def __eq__(self, other):
        return isinstance(other, Channel) and np.array_equal(self.rows, other.rows)

    @classmethod
    def bsc(cls, p):
        return cls([[1 - p, p], [p, 1 - p]])

    @classmethod
    def noiseless(cls, size):
        return cls(np.eye(size))

    @classmethod
    def completely_noisy(cls, n_inputs, n_outputs):
        return cls(np.full((n_inputs, n_outputs), 1.0 / n_outputs))

    @classmethod
    def noisy_typewriter(cls, size, noise_support):
        """``Y = X + Z mod size`` with ``Z`` uniform on ``noise_support``."""
        rows = np.zeros((size, size))
        for x in range(size):
            for z in noise_support:
                rows[x, (x + z) % size] += 1.0 / len(noise_support)
        return cls(rows)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint pmf ``table[x, y]``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2:
            raise ValidationError(f"joint distribution: expected 2-D table, got shape {t.shape}")
        check_probability_vector(t.ravel(), name="joint distribution")
        object.__setattr__(self, "table", _frozen(np.clip(t, 0.0, None)))

    @classmethod
    def from_input_and_channel(cls, input_dist, channel):
        p = check_probability_vector(input_dist, name="input distribution")
        w = check_stochastic_matrix(channel)
        if p.size != w.shape[0]:
            raise ValidationError("input distribution: dimension mismatch with channel")
        return cls(p[:, None] * w)

    @property
    def shape(self):
        return self.table.shape

    def marginal_x(self):
        return Distribution(self.table.sum(axis=1))

    def marginal_y(self):
        return Distribution(self.table.sum(axis=0))

    def conditional(self):
        """``Q_{Y|X}``; rows with zero mass are set uniform."""
        px = self.table.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(px > 0, self.table / np.where(px > 0, px, 1.0), 1.0 / self.shape[1])
        return Channel(rows / rows.sum(axis=1, keepdims=True))

    def __eq__(self, other):
        return isinstance(other, JointDistribution) and np.array_equal(self.table, other.table)


@dataclass(frozen=True)
class RateVector:
    """Per-node rates in bits per channel use."""

    rates: tuple

    def __post_init__(self):
        r = tuple(float(x) for x in self.rates)
        if any(x < 0 or math.isnan(x) for x in r):
            raise ValidationError("rate vector: entries must be nonnegative")
        object.__setattr__(self, "rates", r)

    def __add__(self, gamma):
        # vector-plus-scalar sum
        return RateVector(tuple(x + float(gamma) for x in self.rates))

    def __len__(self):
        return len(self.rates)

    def __iter__(self):
        return iter(self.rates)

    @classmethod
    def from_message_sizes(cls, message_sizes, n):
        return cls(tuple(math.log2(m) / n for m in message_sizes))


@dataclass(frozen=True, eq=False)
class Network:
    """A ``d``-node memoryless stationary network.

    ``kernel[a, b]`` is the probability of output tuple with rank ``b`` given
    input tuple with rank ``a``; ranks are row-major over the effective
    alphabet sizes (node 0 most significant).
    """

    d: int
    input_alphabets: tuple
    output_alphabets: tuple
    kernel: np.ndarray
    demands: tuple
    deterministic: bool = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("network: empty network (d must be >= 1)")
        ins = tuple(int(a) for a in self.input_alphabets)
        outs = tuple(int(a) for a in self.output_alphabets)
        if len(ins) != self.d or len(outs) != self.d:
            raise ValidationError("network: alphabet lists must have length d")
        if any(a < 0 for a in ins + outs):
            raise ValidationError("network: alphabet sizes must be >= 0")
        object.__setattr__(self, "input_alphabets", ins)
        object.__setattr__(self, "output_alphabets", outs)
        n_in = math.prod(max(a, 1) for a in ins)
        n_out = math.prod(max(a, 1) for a in outs)
        k = np.asarray(self.kernel, dtype=float)
        if k.size != n_in * n_out:
            raise ValidationError(
                f"network: mismatched table dimensions (kernel has {k.size} entries, "
                f"expected {n_in} x {n_out})"
            )
        k = check_stochastic_matrix(k.reshape(n_in, n_out), name="network kernel")
        object.__setattr__(self, "kernel", _frozen(k))
        if len(self.demands) != self.d:
            raise ValidationError("network: demands must list one destination set per node")
        dem = []
        for i, dst in enumerate(self.demands):
            s = frozenset(int(j) for j in dst)
            if any(j < 0 or j >= self.d for j in s):
                raise ValidationError(f"network: demand of node {i} references a nonexistent node")
            dem.append(s)
        object.__setattr__(self, "demands", tuple(dem))
        object.__setattr__(self, "deterministic", bool(np.all((k == 0.0) | (k == 1.0))))

    # effective sizes (empty alphabets carry one null symbol)
    @property
    def in_sizes(self):
        return tuple(max(a, 1) for a in self.input_alphabets)

    @property
    def out_sizes(self):
        return tuple(max(a, 1) for a in self.output_alphabets)

    @property
    def transmitting_nodes(self):
        return frozenset(i for i, a in enumerate(self.input_alphabets) if a > 0)

    @property
    def demand_pairs(self):
        """Sorted ``(source, destination)`` pairs."""
        return tuple(sorted((i, j) for i in range(self.d) for j in self.demands[i]))

    def kernel_tensor(self):
        return self.kernel.reshape(self.in_sizes + self.out_sizes)

    def input_rank(self, xs):
        return int(np.ravel_multi_index(tuple(xs), self.in_sizes))

    def output_tuple(self, rank):
        return tuple(int(v) for v in np.unravel_index(rank, self.out_sizes))

    def to_dict(self):
        return {
            "d": self.d,
            "input_alphabets": list(self.input_alphabets),
            "output_alphabets": list(self.output_alphabets),
            "kernel": self.kernel.tolist(),
            "demands": [sorted(s) for s in self.demands],
        }

    def __eq__(self, other):
        return (
            isinstance(other, Network)
            and self.d == other.d
            and self.input_alphabets == other.input_alphabets
            and self.output_alphabets == other.output_alphabets
            and self.demands == other.demands
            and np.array_equal(self.kernel, other.kernel)
        )

    @classmethod
    def point_to_point(cls, channel):
        """Node 0 transmits through ``channel`` to node 1."""
        w = check_stochastic_matrix(channel)
        return cls(2, (w.shape[0], 0), (0, w.shape[1]), w, ({1}, set()))


def validate_network(spec, *, atol=LOADER_ATOL):
    """Build a :class:`Network` from a parsed description (or re-check one).

    Kernel rows off by more than ``atol`` are rejected as non-stochastic;
    smaller deviations are renormalized.
    """
    if isinstance(spec, Network):
        spec = spec.to_dict()
    if not isinstance(spec, Mapping):
        raise ValidationError("network description must be a mapping")
    missing = [k for k in ("d", "input_alphabets", "output_alphabets", "kernel", "demands") if k not in spec]
    if missing:
        raise ValidationError(f"network description: missing keys {missing}")
    d = int(spec["d"])
    if d < 1:
        raise ValidationError("network: empty network (d must be >= 1)")
    ins = [int(a) for a in spec["input_alphabets"]]
    outs = [int(a) for a in spec["output_alphabets"]]
    if len(ins) != d or len(outs) != d:
        raise ValidationError("network: alphabet lists must have length d")
    n_in = math.prod(max(a, 1) for a in ins)
    n_out = math.prod(max(a, 1) for a in outs)
    try:
        k = np.asarray(spec["kernel"], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"network: mismatched table dimensions ({exc})") from None
    if k.size != n_in * n_out or (k.ndim >= 1 and k.shape[-1] != n_out):
        raise ValidationError(
            f"network: mismatched table dimensions (kernel shape {k.shape}, "
            f"expected {n_in} input tuples x {n_out} output tuples)"
        )
    k = renormalize_rows(k.reshape(n_in, n_out), atol=atol, name="network kernel")
    demands = spec["demands"]
    if len(demands) != d:
        raise ValidationError("network: demands must list one destination set per node")
    for i, dst in enumerate(demands):
        for j in dst:
            if not 0 <= int(j) < d:
                raise ValidationError(f"network: demand of node {i} references nonexistent node {j}")
    return Network(d, tuple(ins), tuple(outs), k, tuple(frozenset(int(j) for j in s) for s in demands))


def bit_pipe_schedule(k, n, t):
    """Bits the ``(a, b)`` pipe may carry at time ``t`` (1-based)."""
    if n < 1:
        raise ValidationError("blocklength must be >= 1")
    if k < 0:
        raise ValidationError("bit budget must be >= 0")
    if not 1 <= t <= n:
        raise ValidationError(f"time index {t} out of range [1, {n}]")
    return (k * t) // n - (k * (t - 1)) // n


def bit_pipe_schedule_all(k, n):
    return tuple(bit_pipe_schedule(k, n, t) for t in range(1, n + 1))


@dataclass(frozen=True, eq=False)
class ModifiedNetwork:
    """``base`` plus nodes ``a``, ``b`` wired to ``v_set`` and a ``k``-bit pipe.

    Per time step ``t``: nodes in ``v_set`` encode using every bit ``b`` has
    received through ``t - 1``; the channel fires; ``a`` (which sees each
    ``v_set`` node's message and outputs so far) emits ``schedule[t-1]`` bits;
    ``b`` broadcasts them to ``v_set``.
    """

    base: Network
    v_set: frozenset
    k: int
    n: int
    schedule: tuple

    def __post_init__(self):
        if sum(self.schedule) != self.k or any(s < 0 for s in self.schedule):
            raise ValidationError("modified network: schedule must be nonnegative and sum to k")

    @property
    def v_nodes(self):
        return tuple(sorted(self.v_set))

    @property
    def edge_values(self):
        """Size of the edge code domain ``{0,1}^k``."""
        return 2 ** self.k

    def bits_before(self, t):
        """Bits ``b`` has received before encoding at (0-based) step ``t``."""
        return (self.k * t) // self.n


def modified_network(base, v_set, k, n):
    if base is None or not isinstance(base, Network):
        raise ValidationError("modified network: empty base network")
    vs = frozenset(int(i) for i in v_set)
    if any(i < 0 or i >= base.d for i in vs):
        raise ValidationError("modified network: invalid v_set")
    if k < 0 or n < 1:
        raise ValidationError("modified network: need k >= 0 and n >= 1")
    return ModifiedNetwork(base, vs, int(k), int(n), bit_pipe_schedule_all(k, n))


def _check_table(arr, shape, upper, what):
    a = np.asarray(arr)
    if a.shape != tuple(shape):
        raise ValidationError(f"{what}: table shape {a.shape}, expected {tuple(shape)}")
    if a.size and (a.min() < 0 or a.max() >= upper):
        raise ValidationError(f"{what}: entries must lie in [0, {upper})")
    out = a.astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Code:
    """An ``(R, n)`` code as explicit tables.

    ``encoders[i][t]`` has shape ``(M_i, |Y_i|^t)`` and maps the message and the
    rank of the output history ``y_i^t`` (0-based ``t``) to the channel input.
    ``decoders[(i, j)]`` has shape ``(M_j, |Y_j|^n)`` and gives node ``j``'s
    estimate of ``W_i``.
    """

    n: int
    message_sizes: tuple
    encoders: tuple
    decoders: Mapping

    @property
    def rates(self):
        return RateVector.from_message_sizes(self.message_sizes, self.n)

    def validate_for(self, net):
        """Return a copy whose tables are checked against ``net``."""
        if len(self.message_sizes) != net.d or any(m < 1 for m in self.message_sizes):
            raise ValidationError("code: need one message size >= 1 per node")
        if len(self.encoders) != net.d:
            raise ValidationError("code: need one encoder list per node")
        encs = []
        for i in range(net.d):
            if len(self.encoders[i]) != self.n:
                raise ValidationError(f"code: node {i} needs {self.n} encoding tables")
            ysz = net.out_sizes[i]
            encs.append(tuple(
                _check_table(self.encoders[i][t], (self.message_sizes[i], ysz ** t),
                             net.in_sizes[i], f"encoder ({i}, {t})")
                for t in range(self.n)
            ))
        if set(self.decoders) != set(net.demand_pairs):
            raise ValidationError("code: decoders must cover exactly the demand pairs")
        decs = {
            (i, j): _check_table(self.decoders[(i, j)],
                                 (self.message_sizes[j], net.out_sizes[j] ** self.n),
                                 self.message_sizes[i], f"decoder ({i}, {j})")
            for (i, j) in net.demand_pairs
        }
        return Code(self.n, tuple(int(m) for m in self.message_sizes), tuple(encs), decs)


@dataclass(frozen=True, eq=False)
class ModifiedCode:
    """A code on :class:`ModifiedNetwork`.

    For ``i`` in ``v_set`` the encoder tables gain a last axis indexed by the bits
    received so far (``2 ** bits_before(t)`` values). ``relay[t]`` has shape
    ``(|W_V|, |Y_V|^(t+1))`` and is node ``a``'s emission at step ``t``. Decoders
    at nodes in ``v_set`` gain a last axis over the full ``2 ** k`` bit string.
    Here ``W_V`` and ``Y_V`` are row-major over the sorted ``v_set`` nodes.
    """

    network: ModifiedNetwork
    n: int
    message_sizes: tuple
    encoders: tuple
    relay: tuple
    decoders: Mapping

    def validate(self):
        mn = self.network
        net = mn.base
        if self.n != mn.n:
            raise ValidationError("code/modified-network mismatch: blocklength differs")
        if len(self.message_sizes) != net.d or any(m < 1 for m in self.message_sizes):
            raise ValidationError("code: need one message size >= 1 per node")
        encs = []
        for i in range(net.d):
            if len(self.encoders[i]) != self.n:
                raise ValidationError(f"code: node {i} needs {self.n} encoding tables")
            tabs = []
            for t in range(self.n):
                shape = (self.message_sizes[i], net.out_sizes[i] ** t)
                if i in mn.v_set:
                    shape += (2 ** mn.bits_before(t),)
                tabs.append(_check_table(self.encoders[i][t], shape, net.in_sizes[i], f"encoder ({i}, {t})"))
            encs.append(tuple(tabs))
        wv = math.prod(self.message_sizes[i] for i in mn.v_nodes)
        yv = math.prod(net.out_sizes[i] for i in mn.v_nodes)
        if len(self.relay) != self.n:
            raise ValidationError("code/modified-network mismatch: relay needs n tables")
        relay = tuple(
            _check_table(self.relay[t], (wv, yv ** (t + 1)), 2 ** mn.schedule[t], f"relay table {t}")
            for t in range(self.n)
        )
        if set(self.decoders) != set(net.demand_pairs):
            raise ValidationError("code: decoders must cover exactly the demand pairs")
        decs = {}
        for (i, j) in net.demand_pairs:
            shape = (self.message_sizes[j], net.out_sizes[j] ** self.n)
            if j in mn.v_set:
                shape += (2 ** mn.k,)
            decs[(i, j)] = _check_table(self.decoders[(i, j)], shape, self.message_sizes[i], f"decoder ({i}, {j})")
        return ModifiedCode(mn, self.n, tuple(int(m) for m in self.message_sizes), tuple(encs), relay, decs)

    @classmethod
    def from_base_code(cls, network, code):
        """Lift a base code so that it ignores the pipe entirely."""
        net = network.base
        code = code.validate_for(net)
        encs = []
        for i in range(net.d):
            tabs = []
            for t in range(code.n):
                e = np.asarray(code.encoders[i][t])
                if i in network.v_set:
                    e = np.repeat(e[..., None], 2 ** network.bits_before(t), axis=-1)
                tabs.append(e)
            encs.append(tuple(tabs))
        wv = math.prod(code.message_sizes[i] for i in network.v_nodes)
        yv = math.prod(net.out_sizes[i] for i in network.v_nodes)
        relay = tuple(np.zeros((wv, yv ** (t + 1)), dtype=np.int64) for t in range(code.n))
        decs = {}
        for pair, tab in code.decoders.items():
            tab = np.asarray(tab)
            if pair[1] in network.v_set:
                tab = np.repeat(tab[..., None], 2 ** network.k, axis=-1)
            decs[pair] = tab
        return cls(network, code.n, code.message_sizes, tuple(encs), relay, decs).validate()


def message_vectors(message_sizes):
    return product(*(range(m) for m in message_sizes))
