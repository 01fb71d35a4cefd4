"""Linear convex structures and the stability / (P) / (Q) side conditions.

``w_combine`` and ``k_combine`` are the affine two- and three-point
structures. The ``check_*`` functions return residuals (``<= 0`` means the
inequality holds) or reports with the worst case and its witness.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _lp
from .metric import FNormMetric
from .space import PointCloud

DEFAULT_BUDGET = 200_000


class HullBudgetExceeded(ValueError):
    pass


def hull_budget() -> int:
    return int(os.environ.get("FMNC_BUDGET", DEFAULT_BUDGET))


@dataclass(frozen=True)
class BarycentricWeights:
    t: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size == 0 or np.any(t < -1e-12) or np.any(t > 1 + 1e-12):
            raise ValueError(f"weights must lie in [0, 1], got {self.t}")
        if abs(t.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got sum {t.sum()}")
        t = np.clip(t, 0.0, 1.0)
        object.__setattr__(self, "t", tuple((t / t.sum()).tolist()))

    def __len__(self):
        return len(self.t)


@dataclass
class PropertyReport:
    name: str
    max_violation: float
    tolerance: float
    samples: int
    witness: dict | None = None
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "max_violation": self.max_violation, "tolerance": self.tolerance,
                "samples": self.samples, "passed": self.passed, "witness": self.witness,
                "params": self.params}


StabilityReport = PropertyReport


def w_combine(x, y, t):
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("t must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("x and y live in different spaces")
    t = t[..., None] if t.ndim else t
    return t * x + (1.0 - t) * y


def k_combine(x, y, z, weights):
    if not isinstance(weights, BarycentricWeights):
        weights = BarycentricWeights(tuple(weights))
    if len(weights) != 3:
        raise ValueError("k_combine needs three weights")
    t1, t2, t3 = weights.t
    return t1 * np.asarray(x, float) + t2 * np.asarray(y, float) + t3 * np.asarray(z, float)


def check_tcs(metric: FNormMetric, u, x, y, t):
    """``d(u, W(x, y, t)) - [t d(u, x) + (1 - t) d(u, y)]``, vectorised over leading axes."""
    t = np.asarray(t, dtype=float)
    return metric(u, w_combine(x, y, t)) - (t * metric(u, x) + (1 - t) * metric(u, y))


def check_tmcs(metric: FNormMetric, u, x, y, z, weights):
    """Three-point analogue of :func:`check_tcs`; ``weights`` may be ``(..., 3)``."""
    w = np.asarray(weights.t if isinstance(weights, BarycentricWeights) else weights, dtype=float)
    if w.shape[-1] != 3 or np.any(w < 0) or np.any(np.abs(w.sum(-1) - 1) > 1e-9):
        raise ValueError("malformed barycentric weights")
    t1, t2, t3 = w[..., 0], w[..., 1], w[..., 2]
    K = t1[..., None] * x + t2[..., None] * y + t3[..., None] * z
    return metric(u, K) - (t1 * metric(u, x) + t2 * metric(u, y) + t3 * metric(u, z))


# --- hull sampling -----------------------------------------------------------

def hull_grid_size(n: int, r: int) -> int:
    return math.comb(n + r - 1, r)


def hull_weights(n: int, r: int, budget: int | None = None) -> np.ndarray:
    """All weight vectors ``k / r`` with nonnegative integer ``k`` summing to ``r``."""
    budget = hull_budget() if budget is None else budget
    size = hull_grid_size(n, r)
    if size > budget:
        raise HullBudgetExceeded(f"hull grid C({n}+{r}-1, {r}) = {size} exceeds budget {budget}")
    combos = np.fromiter(itertools.chain.from_iterable(
        itertools.combinations_with_replacement(range(n), r)), dtype=np.int64, count=size * r)
    combos = combos.reshape(size, r)
    counts = np.zeros((size, n), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(size), r), combos.ravel()), 1)
    return counts / r


def hull_sample(points: PointCloud, resolution: int, budget: int | None = None,
                return_weights: bool = False):
    """Barycentric grid over ``co(points)``; duplicates are dropped (first kept)."""
    if len(points) == 0:
        raise ValueError("cannot sample the hull of an empty cloud")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    W = hull_weights(len(points), resolution, budget)
    P = W @ points.points
    _, first = np.unique(P, axis=0, return_index=True)
    keep = np.sort(first)
    out = points.with_points(P[keep], label=f"co({points.label})@{resolution}")
    return (out, W[keep]) if return_weights else out


def grid_gap(metric: FNormMetric, generators: np.ndarray, resolution: int) -> float:
    """Bound on how far a point of the true hull can be from the hull grid.

    Rounding the (at most ``min(n, dim + 1)``, by Caratheodory) active
    barycentric weights to multiples of ``1/r`` moves a point by at most
    ``(active - 1) / r`` times the diameter, for a homogeneous subadditive metric.
    """
    n = len(generators)
    if n <= 1:
        return 0.0
    active = min(n, generators.shape[1] + 1)
    return diameter(metric, generators) * (active - 1) / resolution


def diameter(metric: FNormMetric, points: np.ndarray) -> float:
    points = np.atleast_2d(points)
    if len(points) < 2:
        return 0.0
    return float(metric.pairwise(points, points).max())


def distance_to_set(metric: FNormMetric, x, C: np.ndarray) -> np.ndarray:
    """Distance from each ``x`` to the finite set ``C`` (min over its points)."""
    x = np.atleast_2d(x)
    out = np.empty(len(x))
    for s in range(0, len(x), 512):
        out[s:s + 512] = metric.pairwise(x[s:s + 512], C).min(axis=1)
    return out


def distance_to_hull(metric: FNormMetric, x, generators: np.ndarray) -> float:
    """Exact gauge-mode distance to ``co(generators)`` by linear programming."""
    if metric.mode != "gauge":
        raise ValueError("exact hull distance needs a gauge-mode metric")
    d, _ = _lp.distance_to_hull(metric.space, metric.caps, generators, np.asarray(x, float))
    return d * 2.0 ** -metric.n0


# --- side conditions ---------------------------------------------------------

def _require_gauge(metric: FNormMetric):
    if metric.mode != "gauge":
        raise ValueError("this check relies on exact scaling; use a gauge-mode metric")


def check_stability(metric: FNormMetric, C: PointCloud, r: float, samples: int,
                    tol: float = 1e-9, seed: int = 0, generators: PointCloud | None = None) -> StabilityReport:
    """Sample ``x, y`` in ``C_r``, check ``d(t x + (1 - t) y, co C) < r``.

    ``C`` is a hull grid; its convex set is ``co(generators)`` (defaults to
    ``co(C)``). Distances to the convex set are exact LP values.
    """
    _require_gauge(metric)
    rng = np.random.default_rng(seed)
    gens = (generators if generators is not None else C).points
    P = C.points
    worst, witness = -math.inf, None
    for _ in range(samples):
        pts = []
        for _ in range(2):
            base = P[rng.integers(len(P))]
            pts.append(base + _random_in_ball(metric, rng, r))
        t = rng.uniform()
        z = w_combine(pts[0], pts[1], t)
        dz = distance_to_hull(metric, z, gens)
        v = dz - r
        if v > worst:
            worst, witness = v, {"x": pts[0].tolist(), "y": pts[1].tolist(), "t": t, "dist": dz}
    return PropertyReport("stability", worst + 0.0 if samples else -math.inf, tol, samples, witness,
                          {"r": r, "seed": seed})


def _random_in_ball(metric: FNormMetric, rng, r: float) -> np.ndarray:
    """A random vector of metric norm strictly below ``r``."""
    v = rng.uniform(-1, 1, metric.space.dim)
    g = float(metric.fnorm(v))
    if g == 0:
        return np.zeros_like(v)
    return v * (r * rng.uniform(0.0, 0.999) / g)


def check_property_P(metric: FNormMetric, tuples, t, tol: float = 1e-12) -> dict[str, PropertyReport]:
    """Both index pairings of property (P).

    ``tuples`` has shape ``(n, 4, dim)`` with rows ``x1, y1, x2, y2``; ``t`` has
    shape ``(n,)``. The printed pairing bounds by ``d(x1, y1), d(x2, y2)``, the
    conventional one by ``d(x1, x2), d(y1, y2)``.
    """
    _require_gauge(metric)
    Q = metric.space.check(tuples)
    t = np.asarray(t, dtype=float)
    x1, y1, x2, y2 = Q[:, 0], Q[:, 1], Q[:, 2], Q[:, 3]
    lhs = metric(w_combine(x1, y1, t), w_combine(x2, y2, t))
    printed = lhs - (t * metric(x1, y1) + (1 - t) * metric(x2, y2))
    conventional = lhs - (t * metric(x1, x2) + (1 - t) * metric(y1, y2))
    out = {}
    for name, res in (("printed", printed), ("conventional", conventional)):
        i = int(np.argmax(res)) if res.size else 0
        out[name] = PropertyReport(f"property_P_{name}", float(res.max()) if res.size else -math.inf,
                                   tol, int(res.size),
                                   {"tuple": Q[i].tolist(), "t": float(t[i])} if res.size else None)
    return out


def check_property_Q(metric: FNormMetric, F: PointCloud, eps_list, budget: int | None = None) -> PropertyReport:
    """Finite eps-nets of ``co(F)`` at every requested eps.

    The hull grid is taken fine enough that its gap is at most ``eps / 4``; a
    set-cover net of the grid at ``eps - gap`` then covers the whole hull at ``eps``.
    """
    from .mnc import cover_net

    _require_gauge(metric)
    sizes, worst = {}, -math.inf
    for eps in eps_list:
        diam = diameter(metric, F.points)
        n_active = min(len(F), F.space.dim + 1)
        if len(F) == 1 or diam == 0:
            r = 1
        else:
            r = max(1, math.ceil(4 * diam * (n_active - 1) / eps))
        grid = hull_sample(F, r, budget)
        gap = grid_gap(metric, F.points, r)
        net = cover_net(metric, grid, eps - gap)
        if not net.verify(metric, grid):
            raise AssertionError("cover net failed re-verification")
        sizes[str(eps)] = len(net.centers)
        worst = max(worst, max(net.radius + gap - eps, -eps))
    return PropertyReport("property_Q", worst, 0.0, len(list(eps_list)), None,
                          {"net_sizes": sizes})
