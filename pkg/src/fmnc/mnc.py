"""Hausdorff measure of noncompactness at desk scale.

Every cloud here is finite, so its true Hausdorff MNC is zero. The
quantity that carries information is the budgeted covering radius

    r_K(M) = inf{eps : M has an eps-net in E with at most K centres},

which is an upper bound for alpha(M) for every K and tends to it as K grows.
:func:`alpha_bounds` brackets ``r_K`` on an eps grid: the upper end is
certified by a net, the lower end by a packing of more than K points that are
pairwise more than ``2 eps`` apart. With ``max_centers=None`` the budget is
unbounded and the bracket collapses onto the finite-set answer (zero).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _lp
from .convexity import grid_gap, hull_sample
from .metric import FNormMetric
from .space import PointCloud, SpaceMismatch

FLOAT_SLACK = 1e-12


@dataclass
class NetCertificate:
    eps: float
    centers: np.ndarray
    center_index: np.ndarray
    distances: np.ndarray
    complete: bool

    @property
    def radius(self) -> float:
        return float(self.distances.max()) if len(self.distances) else 0.0

    def __len__(self):
        return len(self.centers)

    def verify(self, metric: FNormMetric, M: PointCloud | np.ndarray) -> bool:
        """Recompute every assigned distance from scratch."""
        P = M.points if isinstance(M, PointCloud) else np.atleast_2d(M)
        if len(P) != len(self.center_index):
            return False
        if len(P) == 0:
            return True
        d = metric(P, self.centers[self.center_index])
        return bool(np.allclose(d, self.distances, rtol=0, atol=1e-12)
                    and np.all(d <= self.eps + FLOAT_SLACK))

    def to_dict(self) -> dict:
        return {"eps": self.eps, "centers": self.centers.tolist(),
                "assignment": [[int(c), float(d)] for c, d in zip(self.center_index, self.distances)],
                "complete": self.complete}


def assign(metric: FNormMetric, P: np.ndarray, centers: np.ndarray, eps: float) -> NetCertificate:
    """Nearest-centre assignment of ``P`` and the resulting certificate."""
    centers = np.atleast_2d(centers)
    if len(P) == 0:
        return NetCertificate(eps, centers, np.zeros(0, int), np.zeros(0), True)
    idx = np.empty(len(P), dtype=int)
    dist = np.empty(len(P))
    for s in range(0, len(P), 1024):
        D = metric.pairwise(P[s:s + 1024], centers)
        idx[s:s + 1024] = D.argmin(axis=1)
        dist[s:s + 1024] = D[np.arange(len(D)), idx[s:s + 1024]]
    return NetCertificate(float(eps), centers, idx, dist, bool(np.all(dist <= eps + FLOAT_SLACK)))


def _greedy_centers(metric: FNormMetric, P: np.ndarray, eps: float, limit: int | None = None):
    covered = np.zeros(len(P), dtype=bool)
    chosen = []
    while not covered.all():
        if limit is not None and len(chosen) == limit:
            return None
        i = int(np.argmin(covered))
        chosen.append(i)
        covered |= metric(P[i], P) <= eps
    return chosen


def greedy_net(metric: FNormMetric, M: PointCloud, eps: float) -> NetCertificate:
    """Scan-order greedy cover: an uncovered point becomes a centre."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    P = M.points
    chosen = _greedy_centers(metric, P, eps)
    return assign(metric, P, P[chosen].reshape(-1, P.shape[1]), eps)


def cover_net(metric: FNormMetric, M: PointCloud, eps: float, candidates: np.ndarray | None = None) -> NetCertificate:
    """Greedy set cover: repeatedly pick the candidate covering most uncovered points."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    P = M.points
    C = P if candidates is None else np.atleast_2d(candidates)
    cover = metric.pairwise(C, P) <= eps
    uncovered = np.ones(len(P), dtype=bool)
    chosen = []
    while uncovered.any():
        gain = cover[:, uncovered].sum(axis=1)
        j = int(np.argmax(gain))
        if gain[j] == 0:
            raise ValueError("candidates cannot cover the cloud at this eps")
        chosen.append(j)
        uncovered &= ~cover[j]
    return assign(metric, P, C[chosen].reshape(-1, P.shape[1]), eps)


def packing_lower(metric: FNormMetric, M: PointCloud, eps: float) -> tuple[int, np.ndarray]:
    """Greedy maximal ``2 eps``-separated subset of ``M`` (scan order)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    W = _packing(metric, M.points, eps)
    return len(W), W


def _packing(metric: FNormMetric, P: np.ndarray, eps: float, limit: int | None = None) -> np.ndarray:
    blocked = np.zeros(len(P), dtype=bool)
    chosen = []
    while not blocked.all():
        i = int(np.argmin(blocked))
        chosen.append(i)
        if limit is not None and len(chosen) >= limit:
            break
        blocked |= metric(P[i], P) <= 2 * eps
    return P[chosen].reshape(-1, P.shape[1])


def is_separated(metric: FNormMetric, W: np.ndarray, sep: float) -> bool:
    if len(W) < 2:
        return True
    D = metric.pairwise(W, W)
    D[np.diag_indices_from(D)] = np.inf
    return bool(D.min() > sep)


def farthest_point_centers(metric: FNormMetric, P: np.ndarray, k: int, start: int = 0):
    """Farthest-point traversal. Returns centre indices, covering radius and the
    index of the farthest remaining point."""
    k = min(k, len(P))
    idx = [start]
    dmin = metric(P[start], P)
    while len(idx) < k:
        j = int(np.argmax(dmin))
        idx.append(j)
        dmin = np.minimum(dmin, metric(P[j], P))
    far = int(np.argmax(dmin))
    return np.array(idx), float(dmin[far]), far


def refine_centers(metric: FNormMetric, P: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Move each centre to the Chebyshev centre of its cluster (gauge mode only)."""
    if metric.mode != "gauge":
        return centers
    cert = assign(metric, P, centers, math.inf)
    out = centers.copy()
    for j in range(len(centers)):
        members = P[cert.center_index == j]
        if len(members) > 64:
            # the LP only needs the outer points; the radius is re-measured by the caller
            idx, _, _ = farthest_point_centers(metric, members, 64)
            members = members[idx]
        if len(members):
            out[j], _ = _lp.chebyshev_center(metric.space, metric.caps, members)
    return out


@dataclass
class AlphaBounds:
    lower: float
    upper: float
    max_centers: int | None
    eps_grid: tuple[float, ...]
    net: NetCertificate | None
    packing: np.ndarray
    raw_upper: float = math.inf

    @property
    def resolution(self) -> float:
        return grid_resolution(self.eps_grid)

    @property
    def ratio(self) -> float:
        return self.upper / self.lower if self.lower > 0 else math.inf

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "max_centers": self.max_centers,
                "eps_grid": list(self.eps_grid), "resolution": self.resolution,
                "net": None if self.net is None else self.net.to_dict(),
                "packing": self.packing.tolist()}


def grid_resolution(eps_grid: Sequence[float]) -> float:
    g = sorted(eps_grid)
    return float(max(np.diff(g))) if len(g) > 1 else float(g[0])


def geometric_grid(top: float, bottom: float, per_octave: int = 8) -> tuple[float, ...]:
    """Decreasing grid ``top * 2**(-j / per_octave)`` down to ``bottom``."""
    n = int(math.ceil(per_octave * math.log2(top / bottom)))
    return tuple(top * 2.0 ** (-j / per_octave) for j in range(n + 1))


def _check_grid(eps_grid) -> tuple[float, ...]:
    g = tuple(float(e) for e in eps_grid)
    if not g or any(e <= 0 for e in g) or any(a <= b for a, b in zip(g, g[1:])):
        raise ValueError("eps_grid must be strictly decreasing positive reals")
    return g


def _rows_in(W: np.ndarray, P: np.ndarray) -> bool:
    if len(W) == 0:
        return True
    return all(np.any(np.all(P == w, axis=1)) for w in W)


def alpha_bounds(metric: FNormMetric, M: PointCloud, eps_grid, max_centers: int | None = None,
                 known_nets: Sequence[np.ndarray] = (), known_packings: Sequence[np.ndarray] = ()) -> AlphaBounds:
    """Bracket the budgeted covering radius of ``M`` on ``eps_grid``.

    ``known_nets`` (centre arrays) and ``known_packings`` (subsets of ``M``) are
    certificates obtained elsewhere, e.g. from a superset or a subset; each one
    is re-verified here before it can tighten a bound.
    """
    grid = _check_grid(eps_grid)
    asc = sorted(grid)
    P = M.points
    dim = M.space.dim
    if len(P) == 0:
        return AlphaBounds(0.0, asc[0], max_centers, grid, assign(metric, P, np.zeros((0, dim)), asc[0]),
                           np.zeros((0, dim)))
    K = max_centers

    # upper end: smallest grid eps with a verified net of <= K centres
    upper, net, raw = math.inf, None, math.inf
    if K is None or len(P) <= K:
        upper, net = asc[0], greedy_net(metric, M, asc[0])
        raw = net.radius
    else:
        cands = []
        idx, R, _ = farthest_point_centers(metric, P, K)
        cands.append(refine_centers(metric, P, P[idx]))
        cands.extend(np.atleast_2d(c) for c in known_nets if len(c) <= K)
        for C in cands:
            cert = assign(metric, P, C, math.inf)
            raw = min(raw, cert.radius)
            snapped = next((e for e in asc if e >= cert.radius), None)
            if snapped is not None and snapped < upper:
                upper, net = snapped, assign(metric, P, C, snapped)
        # K+1 farthest-point centres are pairwise >= R apart, so no K-net beats R/2
        for e in asc:
            if e >= upper:
                break
            if e < R / 2:
                continue
            chosen = _greedy_centers(metric, P, e, limit=K)
            if chosen is not None:
                g = assign(metric, P, P[chosen], e)
                upper, net = e, g
                raw = min(raw, g.radius)
                break

    # lower end: largest grid eps with a (> K)-point packing at separation 2 eps
    lower, packing = 0.0, np.zeros((0, dim))
    if K is not None and len(P) > K:
        idx, R, far = farthest_point_centers(metric, P, K)
        witnesses = [P[np.append(idx, far)]]
        witnesses.extend(W for W in known_packings if len(W) > K and _rows_in(W, P))
        for W in witnesses:
            D = metric.pairwise(W, W)
            D[np.diag_indices_from(D)] = np.inf
            sep = D.min()
            e = next((e for e in grid if 2 * e < sep), 0.0)
            if e > lower:
                lower, packing = e, W
        # a (K+1)-packing at eps forces r_K >= eps, so only eps < raw can succeed
        for e in grid:
            if e <= lower:
                break
            if e >= raw:
                continue
            W = _packing(metric, P, e, limit=K + 1)
            if len(W) > K:
                lower, packing = e, W
                break
    return AlphaBounds(lower, upper, K, grid, net, packing, raw)


# --- convex-hull net transfer --------------------------------------------------

@dataclass
class TransferResult:
    net: NetCertificate
    eta: float
    eps: float
    grid_gap: float
    hinge_margin: float
    hull_net_size: int
    resolution: int

    @property
    def bound(self) -> float:
        """Covering radius claimed for the true ``co(M)``."""
        return self.eta + self.eps + self.grid_gap

    def to_dict(self) -> dict:
        return {"net": self.net.to_dict(), "eta": self.eta, "eps": self.eps, "grid_gap": self.grid_gap,
                "hinge_margin": self.hinge_margin, "hull_net_size": self.hull_net_size,
                "resolution": self.resolution, "bound": self.bound}


def net_transfer_co(metric: FNormMetric, M: PointCloud, N: NetCertificate, eps: float, resolution: int,
                    hinge_samples: int = 200, seed: int = 0, budget: int | None = None) -> TransferResult:
    """Turn an eta-net ``N`` of ``M`` into an ``(eta + eps)``-net of the hull grid of ``M``.

    Every grid point ``x = sum (k_i / r) m_i`` of ``co(M)`` sits within eta of
    ``z = sum (k_i / r) n_{a(i)}``, where ``a(i)`` is the centre assigned to
    ``m_i``; ``z`` is a grid point of ``co(N)`` at the same resolution, so an
    eps-net ``K`` of that grid covers ``x`` at ``eta + eps``. The hinge
    ``d(x, z) <= eta`` is spot-checked on sampled grid points.
    """
    if metric.mode != "gauge":
        raise ValueError("net transfer relies on exact scaling; use a gauge-mode metric")
    if not N.complete or not N.verify(metric, M):
        raise ValueError("input net certificate is incomplete or does not verify")
    eta = N.eps
    centers = PointCloud(N.centers, M.space, "N")
    C, WC = hull_sample(centers, resolution, budget, return_weights=True)
    K = greedy_net(metric, C, eps)
    T, WT = hull_sample(M, resolution, budget, return_weights=True)
    cert = assign(metric, T.points, K.centers, eta + eps)

    rng = np.random.default_rng(seed)
    pick = rng.choice(len(T), size=min(hinge_samples, len(T)), replace=False)
    A = np.zeros((len(M), len(N.centers)))
    A[np.arange(len(M)), N.center_index] = 1.0
    Z = (WT[pick] @ A) @ N.centers
    hinge = metric(T.points[pick], Z) - eta
    on_grid = metric.pairwise(Z, C.points).min(axis=1)
    if on_grid.max() > 1e-9:
        raise AssertionError("transferred point left the hull grid of the net")
    return TransferResult(cert, eta, eps, grid_gap(metric, M.points, resolution),
                          float(hinge.max()), len(K), resolution)


# --- set operations -----------------------------------------------------------

def minkowski_sum(M: PointCloud, N: PointCloud) -> PointCloud:
    if M.space != N.space:
        raise SpaceMismatch("clouds live in different spaces")
    S = (M.points[:, None, :] + N.points[None, :, :]).reshape(-1, M.space.dim)
    return PointCloud(S, M.space, f"{M.label}+{N.label}")


def union(M: PointCloud, N: PointCloud) -> PointCloud:
    if M.space != N.space:
        raise SpaceMismatch("clouds live in different spaces")
    return PointCloud(np.vstack([M.points, N.points]), M.space, f"{M.label}|{N.label}")


def brute_force_min_net(metric: FNormMetric, M: PointCloud, eps: float, candidates: np.ndarray | None = None) -> int:
    """Exact minimum number of candidate centres covering ``M`` at ``eps``."""
    P = M.points
    C = P if candidates is None else np.atleast_2d(candidates)
    if len(C) > 20:
        raise ValueError("brute force is limited to 20 candidates")
    cover = metric.pairwise(C, P) <= eps
    for k in range(1, len(C) + 1):
        for S in itertools.combinations(range(len(C)), k):
            if cover[list(S)].any(axis=0).all():
                return k
    raise ValueError("candidates cannot cover the cloud")


# --- proposition checks ---------------------------------------------------------

@dataclass
class ItemCheck:
    item: str
    relation: str
    margin: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.margin <= self.tolerance

    def to_dict(self) -> dict:
        return {"item": self.item, "relation": self.relation, "margin": self.margin,
                "tolerance": self.tolerance, "passed": self.passed}


def check_mnc_properties(metric: FNormMetric, clouds: Sequence[PointCloud], eps_grid,
                         max_centers: int = 3, seed: int = 0) -> list[ItemCheck]:
    """Bound-level versions of the basic MNC properties on consecutive cloud pairs.

    Relations that change the set size also change the centre budget: a
    K-net of M and of N give a 2K-net of their union and a K*K-net of M + N.
    """
    grid = _check_grid(eps_grid)
    tol = 2 * grid_resolution(grid)
    K = max_centers
    rng = np.random.default_rng(seed)
    out: list[ItemCheck] = []

    def ab(X, k=K, **kw):
        return alpha_bounds(metric, X, grid, k, **kw)

    for M, N in zip(clouds[:-1], clouds[1:]):
        bM, bN = ab(M), ab(N)
        # (i) monotonicity: a subset inherits the superset's net; the superset its packing
        sub = M.with_points(M.points[: max(1, len(M) // 2)], "sub")
        b_sub = ab(sub, known_nets=[bM.net.centers])
        b_sup = ab(M, known_packings=[b_sub.packing])
        out.append(ItemCheck("i", "upper(sub) <= upper(M)", b_sub.upper - bM.upper, tol))
        out.append(ItemCheck("i", "lower(sub) <= lower(M)", b_sub.lower - b_sup.lower, tol))
        out.append(ItemCheck("i", "lower(sub) <= upper(M)", b_sub.lower - bM.upper, tol))
        # (ii) closure is the identity on finite clouds
        b_closed = ab(M.with_points(M.points.copy()))
        out.append(ItemCheck("ii", "bounds(closure M) == bounds(M)",
                             abs(b_closed.upper - bM.upper) + abs(b_closed.lower - bM.lower), 0.0))
        # (iii) translation invariance
        z = rng.uniform(-3, 3, M.space.dim)
        bz = ab(M.with_points(M.points + z))
        out.append(ItemCheck("iii", "bounds(z + M) == bounds(M)",
                             max(abs(bz.upper - bM.upper), abs(bz.lower - bM.lower)), tol))
        # (iv) homogeneity with a matched grid
        for lam in (2.0, 0.5):
            b_l = alpha_bounds(metric, M.with_points(lam * M.points), tuple(lam * e for e in grid), K)
            out.append(ItemCheck("iv", f"bounds({lam} M) == {lam} bounds(M)",
                                 max(abs(b_l.upper - lam * bM.upper), abs(b_l.lower - lam * bM.lower)),
                                 lam * tol))
        # (vi) Minkowski sum
        S = minkowski_sum(M, N)
        sum_net = (bM.net.centers[:, None, :] + bN.net.centers[None, :, :]).reshape(-1, M.space.dim)
        b_S_big = ab(S, K * K, known_nets=[sum_net])
        out.append(ItemCheck("vi", "upper_K2(M+N) <= upper(M) + upper(N)",
                             b_S_big.upper - (bM.upper + bN.upper), tol))
        shifts = [bM.packing + N.points[0], bN.packing + M.points[0]]
        b_S = ab(S, known_packings=[w for w in shifts if len(w)])
        out.append(ItemCheck("vi", "|lower(M) - lower(N)| <= lower(M+N)",
                             abs(bM.lower - bN.lower) - b_S.lower, tol))
        out.append(ItemCheck("vi", "max(lower(M), lower(N)) <= upper(M+N)",
                             max(bM.lower, bN.lower) - b_S.upper, tol))
        # (vii) union
        U = union(M, N)
        b_U2 = ab(U, 2 * K, known_nets=[np.vstack([bM.net.centers, bN.net.centers])])
        out.append(ItemCheck("vii", "upper_2K(M|N) <= max(upper(M), upper(N))",
                             b_U2.upper - max(bM.upper, bN.upper), tol))
        b_U = ab(U, known_packings=[bM.packing, bN.packing])
        out.append(ItemCheck("vii", "max(lower(M), lower(N)) <= lower(M|N)",
                             max(bM.lower, bN.lower) - b_U.lower, tol))
        # (v) finite sets are precompact: unbounded budget reaches the finest eps
        b_inf = ab(M, None)
        out.append(ItemCheck("v", "upper_inf(M) <= min eps", b_inf.upper - min(grid), 0.0))
    return out


def ball_grid(metric: FNormMetric, center, radius: float, step: float) -> PointCloud:
    """Lattice points of spacing ``step`` inside the closed metric ball (small dim only)."""
    space = metric.space
    center = np.asarray(center, dtype=float)
    w = _extent(metric, radius)
    axes = [np.arange(-math.floor(wi / step), math.floor(wi / step) + 1) * step for wi in w]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, space.dim)
    pts = pts[metric.fnorm(pts) <= radius + FLOAT_SLACK]
    return PointCloud(pts + center, space, f"B({radius})")


def _extent(metric: FNormMetric, radius: float) -> np.ndarray:
    """Coordinate half-widths of the metric ball of the given radius."""
    out = np.empty(metric.space.dim)
    for i in range(metric.space.dim):
        e = np.zeros(metric.space.dim)
        e[i] = 1.0
        out[i] = radius / float(metric.fnorm(e))
    return out


def ball_covering_trend(metric_factory, dims: Sequence[int], eps: float, step: float) -> list[dict]:
    """Greedy net size of the unit ball grid at ``eps`` as the dimension grows."""
    rows = []
    for d in dims:
        metric = metric_factory(d)
        B = ball_grid(metric, np.zeros(d), 1.0, step)
        rows.append({"dim": d, "points": len(B), "net_size": len(greedy_net(metric, B, eps))})
    return rows


# --- nested families ------------------------------------------------------------

@dataclass
class DecreasingFamily:
    members: list[PointCloud]
    closed: bool = True
    tol: float = 1e-12
    label: str = ""

    def __post_init__(self):
        if not self.members:
            raise ValueError("a family needs at least one member")

    def verify(self, metric: FNormMetric) -> bool:
        for big, small in zip(self.members, self.members[1:]):
            if len(small) and metric.pairwise(small.points, big.points).min(axis=1).max() > self.tol:
                return False
        return True


@dataclass
class ProbeResult:
    point: np.ndarray | None
    max_distance: float
    eps: float
    uppers: list[float] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.point is not None

    def to_dict(self) -> dict:
        return {"point": None if self.point is None else self.point.tolist(),
                "max_distance": self.max_distance, "eps": self.eps, "found": self.found,
                "uppers": self.uppers}


def nested_intersection_probe(metric: FNormMetric, family: DecreasingFamily, eps: float,
                              eps_grid=None) -> ProbeResult:
    """Search for a point within ``eps`` of every member of the family prefix.

    Candidates are the points of the last member and the centres of its
    greedy nets; the best one is returned when it meets ``eps``, otherwise
    ``point`` is ``None`` and the achieved distance is reported.
    """
    if not family.verify(metric):
        raise ValueError("family is not nested")
    last = family.members[-1]
    cands = [last.points]
    cands.append(greedy_net(metric, last, eps).centers)
    C = np.vstack(cands)
    worst = np.zeros(len(C))
    for member in family.members:
        worst = np.maximum(worst, metric.pairwise(C, member.points).min(axis=1))
    j = int(np.argmin(worst))
    uppers = []
    if eps_grid is not None:
        uppers = [alpha_bounds(metric, m, eps_grid, 1).upper for m in family.members]
    point = C[j] if worst[j] <= eps else None
    return ProbeResult(point, float(worst[j]), eps, uppers)
