"""JSON loaders and writers for networks, channels, codes, sources, sets and joints.

Every loader returns the parsed object together with the SHA-256 digest of the
file bytes so that run records can identify their inputs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .core import Channel, Code, ModifiedCode, modified_network, validate_network
from .coupling import EventSet, MarkovSource
from .validation import LOADER_ATOL, ValidationError, renormalize_rows


def read_json(path):
    """``(data, sha256)``; I/O and syntax errors become :class:`ValidationError` with context."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path}: not UTF-8 text ({exc.reason})") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return data, hashlib.sha256(raw).hexdigest()


def _field(data, key, path):
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    if key not in data:
        raise ValidationError(f"{path}: missing field '{key}'")
    return data[key]


def _wrap(path, fn):
    try:
        return fn()
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from None


def channel_from_dict(data, path="<channel>"):
    kernel = _field(data, "kernel", path)
    if "d" in data:
        raise ValidationError(f"{path}: field 'd' present; this is a network file, not a channel")

    def build():
        w = np.asarray(kernel, dtype=float)
        if w.ndim != 2:
            raise ValidationError(f"field 'kernel' must be a 2-D matrix, got {w.ndim}-D")
        return Channel(renormalize_rows(w, atol=LOADER_ATOL, name="field 'kernel'"))

    return _wrap(path, build)


def load_channel(path):
    data, digest = read_json(path)
    return channel_from_dict(data, str(path)), digest


def load_network(path):
    data, digest = read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return _wrap(path, lambda: validate_network(data)), digest


def _pair_key(entry, path):
    return int(_field(entry, "source", path)), int(_field(entry, "dest", path))


def code_from_dict(data, net, path="<code>"):
    """Code file: ``n``, ``message_sizes``, ``encoders[node][t]``, ``decoders`` list.

    Each decoder entry is ``{"source": i, "dest": j, "table": [...]}``. With a
    ``modified`` object (``v_set``, ``k``) and ``relay`` tables the result is a
    code on the modified network.
    """
    def build():
        n = int(_field(data, "n", path))
        sizes = tuple(int(m) for m in _field(data, "message_sizes", path))
        encs = tuple(tuple(np.asarray(t, dtype=np.int64) for t in node)
                     for node in _field(data, "encoders", path))
        decs = {}
        for entry in _field(data, "decoders", path):
            decs[_pair_key(entry, path)] = np.asarray(_field(entry, "table", path), dtype=np.int64)
        if "modified" in data:
            mod = data["modified"]
            mn = modified_network(net, _field(mod, "v_set", path), int(_field(mod, "k", path)), n)
            relay = tuple(np.asarray(t, dtype=np.int64) for t in _field(data, "relay", path))
            return ModifiedCode(mn, n, sizes, encs, relay, decs).validate()
        return Code(n, sizes, encs, decs).validate_for(net)

    return _wrap(path, build)


def code_to_dict(code):
    out = {
        "n": code.n,
        "message_sizes": list(code.message_sizes),
        "encoders": [[np.asarray(t).tolist() for t in node] for node in code.encoders],
        "decoders": [{"source": i, "dest": j, "table": np.asarray(code.decoders[(i, j)]).tolist()}
                     for (i, j) in sorted(code.decoders)],
    }
    if isinstance(code, ModifiedCode):
        out["modified"] = {"v_set": sorted(code.network.v_set), "k": code.network.k}
        out["relay"] = [np.asarray(t).tolist() for t in code.relay]
    return out


def load_code(path, net):
    data, digest = read_json(path)
    return code_from_dict(data, net, str(path)), digest


def source_from_dict(data, path="<source>"):
    """``{"n", "base_size", "kernels"}``, ``{"n", "iid": p}`` or ``{"n", "initial", "transition"}``."""
    def build():
        n = int(_field(data, "n", path))
        if "iid" in data:
            return MarkovSource.iid(data["iid"], n)
        if "transition" in data:
            return MarkovSource.markov_chain(_field(data, "initial", path), data["transition"], n)
        b = int(_field(data, "base_size", path))
        return MarkovSource(n, b, tuple(np.asarray(k, dtype=float) for k in _field(data, "kernels", path)))

    return _wrap(path, build)


def load_source(path):
    data, digest = read_json(path)
    return source_from_dict(data, str(path)), digest


def set_from_dict(data, path="<set>"):
    """``{"n", "base_size", "members": [[...], ...]}`` or ``{"base_size", "center", "radius"}``."""
    def build():
        b = int(_field(data, "base_size", path))
        if "center" in data:
            return EventSet.hamming_ball([int(v) for v in data["center"]], int(_field(data, "radius", path)), b)
        n = int(_field(data, "n", path))
        return EventSet.from_sequences(_field(data, "members", path), b, n)

    return _wrap(path, build)


def load_set(path):
    data, digest = read_json(path)
    return set_from_dict(data, str(path)), digest


def joint_from_dict(data, path="<joint>"):
    """``{"joint": [...], "z_dist": [...], "a1": 2, "a2": 2}``; ``joint`` is ``(|Z|, a1^n, a2^n)`` or 2-D."""
    def build():
        J = np.asarray(_field(data, "joint", path), dtype=float)
        if J.ndim == 2:
            J = J[None]
        z = np.asarray(data.get("z_dist", [1.0]), dtype=float)
        return J, z, int(data.get("a1", 2)), int(data.get("a2", 2))

    return _wrap(path, build)


def load_joint(path):
    data, digest = read_json(path)
    return joint_from_dict(data, str(path)), digest


__all__ = [
    "channel_from_dict",
    "code_from_dict",
    "code_to_dict",
    "joint_from_dict",
    "load_channel",
    "load_code",
    "load_joint",
    "load_network",
    "load_set",
    "load_source",
    "read_json",
    "set_from_dict",
    "source_from_dict",
]
