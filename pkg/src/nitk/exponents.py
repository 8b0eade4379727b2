"""Channel capacity and the above-capacity success exponent.

``alpha(R) = min_Q D(Q_{Y|X} || W | Q_X) + |R - I_Q(X;Y)|^+`` is searched over
joint pmfs supported where ``W > 0``: a uniform composition grid first, then
local refinement from the best grid points and from ``P* x W``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator

from .core import Channel, Distribution, JointDistribution
from .measures import composition_grid, conditional_kl, mutual_information
from .validation import NotFittedError, ValidationError, check_stochastic_matrix

DEFAULT_MAX_RESOLUTION = 32
DEFAULT_POINT_BUDGET = 200_000
MAX_GRID_POINTS = 5_000_000
CONDITION_CAPACITY_TOL = 1e-10
LN2 = math.log(2.0)


class ConvergenceError(RuntimeError):
    def __init__(self, message, gap):
        super().__init__(f"{message} (achieved gap {gap:.3e})")
        self.gap = gap


class InternalError(RuntimeError):
    pass


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    input_dist: Distribution
    output_dist: Distribution
    iterations: int
    gap: float


@dataclass(frozen=True)
class ExponentResult:
    rate: float
    alpha: float
    minimizer: JointDistribution
    kl_part: float
    rate_part: float
    grid_resolution: int = 0
    grid_points: int = 0


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    x: int
    y: int
    margin: float
    capacity: float


@dataclass(frozen=True)
class PerturbationDiagnostics:
    condition_holds: bool
    x0: int | None
    y0: int | None
    x1: int | None
    y1: int | None
    zeta: float
    lambda_max: float
    deltas: tuple
    alphas: tuple
    slope_estimates: tuple
    path_slopes: tuple
    capacity: float

    @property
    def strictly_decreasing(self):
        s = self.slope_estimates
        return all(a > b for a, b in zip(s, s[1:]))


def _capacity_bounds(p, w):
    q = p @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(w > 0, np.log2(np.where(w > 0, w, 1.0) / np.where(q > 0, q, 1.0)[None, :]), 0.0)
    d = (w * logs).sum(axis=1)
    return float(p @ d), float(d.max()), d


def channel_capacity(ch, tol=1e-9, max_iter=200_000):
    """Blahut-Arimoto with the ``max_x D(W_x || q)`` upper bound as stopping rule."""
    w = check_stochastic_matrix(ch)
    if tol <= 0:
        raise ValidationError("channel_capacity: tol must be > 0")
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    lower, upper, d = _capacity_bounds(p, w)
    it = 0
    while upper - lower > tol:
        if it >= max_iter:
            raise ConvergenceError("Blahut-Arimoto did not converge", upper - lower)
        p = p * np.exp2(d - d.max())
        p /= p.sum()
        lower, upper, d = _capacity_bounds(p, w)
        it += 1
    cap = min(max(lower, 0.0), math.log2(min(w.shape)))
    return CapacityResult(cap, Distribution(p), Distribution(p @ w), it, max(upper - lower, 0.0))


def grid_size(resolution, cells):
    return math.comb(resolution + cells - 1, cells - 1)


def default_resolution(cells, budget=DEFAULT_POINT_BUDGET, cap=DEFAULT_MAX_RESOLUTION):
    g = cap
    while g > 1 and grid_size(g, cells) > budget:
        g -= 1
    return g


class _Objective:
    """Vectorized objective over joint pmfs restricted to the support of ``W``."""

    def __init__(self, w):
        self.w = w
        self.nx, self.ny = w.shape
        self.cells = np.argwhere(w > 0)
        self.cx = self.cells[:, 0]
        self.cy = self.cells[:, 1]
        self.logw = np.log2(w[self.cx, self.cy])
        self.ax = np.eye(self.nx)[self.cx]
        self.ay = np.eye(self.ny)[self.cy]

    def to_table(self, q):
        t = np.zeros((self.nx, self.ny))
        t[self.cx, self.cy] = q
        return t

    def parts(self, q):
        """(kl, mutual information) for rows of ``q`` (shape (..., cells))."""
        q = np.atleast_2d(q)
        qx = q @ self.ax
        qy = q @ self.ay
        with np.errstate(divide="ignore", invalid="ignore"):
            lq = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), 0.0)
            lqx = np.where(qx > 0, np.log2(np.where(qx > 0, qx, 1.0)), 0.0)
            lqy = np.where(qy > 0, np.log2(np.where(qy > 0, qy, 1.0)), 0.0)
        hxy = (q * lq).sum(axis=1)
        hx = (qx * lqx).sum(axis=1)
        hy = (qy * lqy).sum(axis=1)
        kl = hxy - hx - (q * self.logw).sum(axis=1)
        mi = hxy - hx - hy
        return np.maximum(kl, 0.0), np.maximum(mi, 0.0)

    def value(self, q, rate):
        kl, mi = self.parts(q)
        return kl + np.maximum(rate - mi, 0.0)

    def gradients(self, q):
        q = np.maximum(q, 1e-300)
        qx = np.bincount(self.cx, q, self.nx)
        qy = np.bincount(self.cy, q, self.ny)
        lq = np.log2(q)
        g_kl = lq - np.log2(qx[self.cx]) - self.logw
        g_mi = lq - np.log2(qx[self.cx]) - np.log2(qy[self.cy]) - 1.0 / LN2
        return g_kl, g_mi


def _refine(obj, q0, rate):
    m = len(q0)
    x0 = np.append(q0, max(rate - obj.parts(q0)[1][0], 0.0))

    def fun(z):
        return obj.parts(z[:m])[0][0] + z[m]

    def jac(z):
        g_kl, _ = obj.gradients(z[:m])
        return np.append(g_kl, 1.0)

    def slack(z):
        return z[m] - rate + obj.parts(z[:m])[1][0]

    def slack_jac(z):
        _, g_mi = obj.gradients(z[:m])
        return np.append(g_mi, 1.0)

    cons = [
        {"type": "eq", "fun": lambda z: z[:m].sum() - 1.0, "jac": lambda z: np.append(np.ones(m), 0.0)},
        {"type": "ineq", "fun": slack, "jac": slack_jac},
    ]
    bounds = [(0.0, 1.0)] * m + [(0.0, None)]
    with np.errstate(all="ignore"):
        res = minimize(fun, x0, jac=jac, bounds=bounds, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 500})
    q = np.clip(res.x[:m], 0.0, None)
    s = q.sum()
    return q / s if s > 0 else q0


def _grid_values(obj, grid, rate, threads):
    chunks = np.array_split(np.arange(len(grid)), max(1, min(threads, len(grid))))
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda idx: obj.value(grid[idx], rate), chunks))
    else:
        parts = [obj.value(grid, rate)]
    # chunks are contiguous, so concatenation restores grid order
    return np.concatenate(parts)


def dueck_exponent(ch, R, grid=None, refine=3, threads=1, capacity=None):
    """Return :class:`ExponentResult` for the success exponent at rate ``R``."""
    w = check_stochastic_matrix(ch)
    if R < 0 or math.isnan(R):
        raise ValidationError("dueck_exponent: rate must be >= 0")
    if refine < 0 or (grid is not None and grid < 1) or threads < 1:
        raise ValidationError("infeasible search parameters: need grid >= 1, refine >= 0, threads >= 1")
    obj = _Objective(w)
    m = len(obj.cells)
    g = default_resolution(m) if grid is None else int(grid)
    if grid_size(g, m) > MAX_GRID_POINTS:
        raise ValidationError(
            f"infeasible search parameters: grid {g} over {m} cells gives {grid_size(g, m)} points"
        )
    pts = composition_grid(g, m) / g
    vals = _grid_values(obj, pts, R, threads)
    # argmin returns the lowest index among ties
    cand = [pts[int(np.argmin(vals))]]
    if refine > 0:
        order = np.lexsort((np.arange(len(vals)), vals))[:refine]
        starts = [pts[i] for i in order]
        cap = capacity if capacity is not None else channel_capacity(w, tol=1e-10)
        px = cap.input_dist.probs
        starts.append(px[obj.cx] * w[obj.cx, obj.cy])
        for s in starts:
            cand.append(s)
            cand.append(_refine(obj, s, R))
    cand = np.array(cand)
    cv = obj.value(cand, R)
    q = cand[int(np.argmin(cv))]
    table = obj.to_table(q)
    J = JointDistribution(table)
    kl = conditional_kl(J.conditional().rows, w, J.marginal_x().probs)
    rate_part = max(R - mutual_information(J), 0.0)
    return ExponentResult(float(R), float(kl + rate_part), J, float(kl), float(rate_part), g, len(pts))


def exponent_objective(ch, J, R):
    """Evaluate the success-exponent objective at the joint pmf ``J``."""
    w = check_stochastic_matrix(ch)
    J = J if isinstance(J, JointDistribution) else JointDistribution(J)
    kl = conditional_kl(J.conditional().rows, w, J.marginal_x().probs)
    return kl + max(R - mutual_information(J), 0.0)


def _log_ratios(w, py):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > 0, np.log2(np.where(w > 0, w, 1.0) / py[None, :]), -np.inf)


def check_exponent_condition(ch, tol=1e-6, capacity=None):
    """Is ``log(W(y|x)/P_Y(y)) <= C`` for every reachable ``(x, y)``?"""
    w = check_stochastic_matrix(ch)
    cap = capacity if capacity is not None else channel_capacity(w, tol=CONDITION_CAPACITY_TOL)
    py = cap.output_dist.probs
    reach = (w > 0).any(axis=0)
    if np.any(reach & (py <= 0)):
        raise InternalError("capacity-achieving output assigns zero mass to a reachable output")
    lr = _log_ratios(w, np.where(py > 0, py, 1.0)) - cap.capacity
    x, y = np.unravel_index(int(np.argmax(lr)), lr.shape)
    margin = float(lr[x, y])
    return ConditionResult(margin <= tol, int(x), int(y), margin, cap.capacity)


def exponent_slope_at_capacity(ch, deltas=(0.04, 0.02, 0.01), tol=1e-6, grid=None, refine=3):
    """Ratios ``alpha(C + delta) / delta`` and the perturbation witnesses."""
    w = check_stochastic_matrix(ch)
    deltas = tuple(float(d) for d in deltas)
    if not deltas or any(d <= 0 for d in deltas) or any(a <= b for a, b in zip(deltas, deltas[1:])):
        raise ValidationError("deltas must be positive and strictly decreasing")
    cap = channel_capacity(w, tol=CONDITION_CAPACITY_TOL)
    cond = check_exponent_condition(w, tol, capacity=cap)
    if cond.holds:
        ones = tuple(1.0 for _ in deltas)
        return PerturbationDiagnostics(True, None, None, None, None, 0.0, 0.0, deltas,
                                       deltas, ones, ones, cap.capacity)
    px = cap.input_dist.probs
    py = cap.output_dist.probs
    lr = _log_ratios(w, np.where(py > 0, py, 1.0))
    x0, y0 = cond.x, cond.y
    masked = np.where((w > 0) & (px[:, None] > 0), lr, np.inf)
    x1, y1 = np.unravel_index(int(np.argmin(masked)), masked.shape)
    if not np.isfinite(masked[x1, y1]) or masked[x1, y1] > cap.capacity + tol:
        raise InternalError("no positive-mass pair with log-ratio at most capacity")
    zeta = float(lr[x0, y0] - lr[x1, y1])
    lam_max = float(px[x1] * w[x1, y1])
    alphas, slopes, path = [], [], []
    base = px[:, None] * w
    for d in deltas:
        a = dueck_exponent(w, cap.capacity + d, grid=grid, refine=refine, capacity=cap).alpha
        alphas.append(float(a))
        slopes.append(float(a / d))
        lam = d / zeta
        if lam <= lam_max:
            qlam = base.copy()
            qlam[x0, y0] += lam
            qlam[x1, y1] -= lam
            qlam /= qlam.sum()
            path.append(float(exponent_objective(w, qlam, cap.capacity + zeta * lam) / (zeta * lam)))
        else:
            path.append(math.nan)
    return PerturbationDiagnostics(False, int(x0), int(y0), int(x1), int(y1), zeta, lam_max,
                                   deltas, tuple(alphas), tuple(slopes), tuple(path), cap.capacity)


class ChannelCapacity(BaseEstimator):
    """Estimator wrapper: ``fit(W)`` sets ``capacity_``, ``input_dist_`` and ``output_dist_``."""

    def __init__(self, tol=1e-9, max_iter=200_000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, W, y=None):
        res = channel_capacity(W, self.tol, self.max_iter)
        self.result_ = res
        self.capacity_ = res.capacity
        self.input_dist_ = res.input_dist.probs
        self.output_dist_ = res.output_dist.probs
        self.gap_ = res.gap
        self.n_iter_ = res.iterations
        return self


class DueckExponent(BaseEstimator):
    """``fit(W)`` stores the channel; ``transform(rates)`` returns ``alpha(R)`` per rate."""

    def __init__(self, grid=None, refine=3, threads=1):
        self.grid = grid
        self.refine = refine
        self.threads = threads

    def fit(self, W, y=None):
        self.channel_ = check_stochastic_matrix(W)
        self.capacity_ = channel_capacity(self.channel_, tol=1e-10)
        return self

    def _check_fitted(self):
        if not hasattr(self, "channel_"):
            raise NotFittedError("DueckExponent is not fitted yet; call fit(W) first")

    def results(self, rates):
        self._check_fitted()
        return [
            dueck_exponent(self.channel_, float(r), self.grid, self.refine, self.threads, self.capacity_)
            for r in np.atleast_1d(np.asarray(rates, dtype=float))
        ]

    def transform(self, rates):
        return np.array([r.alpha for r in self.results(rates)])

    def fit_transform(self, W, rates):
        return self.fit(W).transform(rates)


__all__ = [
    "CapacityResult",
    "Channel",
    "ChannelCapacity",
    "ConditionResult",
    "ConvergenceError",
    "DueckExponent",
    "ExponentResult",
    "InternalError",
    "PerturbationDiagnostics",
    "channel_capacity",
    "check_exponent_condition",
    "dueck_exponent",
    "exponent_objective",
    "exponent_slope_at_capacity",
]
