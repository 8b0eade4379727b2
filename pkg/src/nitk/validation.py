"""Input validation helpers shared by every module.

These mirror the ``check_array`` family from scikit-learn: they accept loosely
typed input (lists, tuples, arrays, or the package's own types) and return a
clean float64 ``ndarray`` or raise :class:`ValidationError`.
"""

from __future__ import annotations

import numpy as np

PROB_ATOL = 1e-12
LOADER_ATOL = 1e-9


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant."""


class NotFittedError(ValueError, AttributeError):
    """Raised when an estimator is used before ``fit``."""


def check_probability_vector(probs, *, atol=PROB_ATOL, name="distribution"):
    p = np.asarray(getattr(probs, "probs", probs), dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{name}: expected a non-empty 1-D vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{name}: non-finite entries")
    if np.any(p < -atol):
        raise ValidationError(f"{name}: negative entries")
    total = p.sum()
    if abs(total - 1.0) > atol:
        raise ValidationError(f"{name}: non-stochastic (sums to {total!r})")
    return np.clip(p, 0.0, None)


def check_stochastic_matrix(rows, *, atol=PROB_ATOL, name="channel"):
    w = np.asarray(getattr(rows, "rows", rows), dtype=float)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise ValidationError(f"{name}: expected a 2-D row-stochastic matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError(f"{name}: non-finite entries")
    if np.any(w < -atol):
        raise ValidationError(f"{name}: negative entries")
    sums = w.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
    if bad.size:
        raise ValidationError(
            f"{name}: non-stochastic row {int(bad[0])} (sums to {sums[bad[0]]!r})"
        )
    return np.clip(w, 0.0, None)


def renormalize_rows(table, *, atol=LOADER_ATOL, name="kernel"):
    """Reject rows off by more than ``atol``; rescale the rest to sum to one."""
    w = np.array(table, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValidationError(f"{name}: non-finite entries")
    if np.any(w < 0):
        raise ValidationError(f"{name}: negative entries")
    sums = w.sum(axis=-1, keepdims=True)
    off = np.abs(sums - 1.0) > atol
    if np.any(off):
        idx = np.argwhere(off[..., 0])[0]
        raise ValidationError(
            f"{name}: non-stochastic row {tuple(int(i) for i in idx)} "
            f"(sums to {float(sums[tuple(idx)][0])!r})"
        )
    return w / sums


def check_same_length(a, b, what="inputs"):
    if len(a) != len(b):
        raise ValidationError(f"{what}: dimension mismatch ({len(a)} vs {len(b)})")


def check_random_state(seed):
    """Return a ``numpy.random.Generator``. ``None`` is rejected: seeds are explicit."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValidationError("a seed is required for stochastic operations")
    return np.random.default_rng(seed)
