"""Darbo-type set iteration, condensing checks and the upper characteristic."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _lp
from .convexity import hull_sample
from .metric import FNormMetric, build_fnorm
from .mnc import AlphaBounds, alpha_bounds, farthest_point_centers
from .space import PointCloud, SpaceMismatch, SpaceModel

log = logging.getLogger(__name__)

OP_KINDS = ("affine-contraction", "contraction-plus-smoothing", "custom-table")


class InvarianceError(ValueError):
    """The starting set is not mapped into its own convex hull."""


@dataclass
class OperatorSpec:
    """``affine-contraction``: ``F(x) = lam x + shift``.

    ``contraction-plus-smoothing``: ``F(x) = lam x + G tanh(x) + shift`` where
    ``G`` is a rank-truncated Gaussian kernel matrix on the grid, scaled so that
    its sup-norm operator norm equals ``gain``.

    ``custom-table``: ``F(x) = matrix @ x + shift``.
    """

    kind: str
    space: SpaceModel
    lam: float = 0.5
    shift: np.ndarray | None = None
    kernel_width: float = 0.5
    gain: float = 0.04
    rank: int = 3
    matrix: np.ndarray | None = None
    _G: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        d = self.space.dim
        self.shift = np.zeros(d) if self.shift is None else self.space.check(self.shift)
        if self.kind == "custom-table":
            self.matrix = np.eye(d) if self.matrix is None else np.asarray(self.matrix, dtype=float)
            if self.matrix.shape != (d, d):
                raise SpaceMismatch(f"matrix must be {d}x{d}")
        if self.kind == "contraction-plus-smoothing":
            self._G = smoothing_kernel(self.space, self.kernel_width, self.rank, self.gain)

    def __call__(self, X) -> np.ndarray:
        X = self.space.check(X)
        if self.kind == "affine-contraction":
            return self.lam * X + self.shift
        if self.kind == "custom-table":
            return X @ self.matrix.T + self.shift
        return self.lam * X + np.tanh(X) @ self._G.T + self.shift

    @property
    def lipschitz_sup(self) -> float:
        """Lipschitz bound in the sup norm."""
        if self.kind == "affine-contraction":
            return abs(self.lam)
        if self.kind == "custom-table":
            return float(np.abs(self.matrix).sum(axis=1).max())
        return abs(self.lam) + self.gain

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "space": self.space.to_dict(), "lambda": self.lam,
             "shift": self.shift.tolist(), "kernel_width": self.kernel_width,
             "gain": self.gain, "rank": self.rank}
        if self.matrix is not None:
            d["matrix"] = self.matrix.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict, space: SpaceModel | None = None) -> "OperatorSpec":
        sp = space if space is not None else SpaceModel.from_dict(d["space"])
        shift = d.get("shift")
        return cls(d["kind"], sp, float(d.get("lambda", 0.5)),
                   None if shift is None else np.asarray(shift, float),
                   float(d.get("kernel_width", 0.5)), float(d.get("gain", 0.04)),
                   int(d.get("rank", 3)),
                   None if d.get("matrix") is None else np.asarray(d["matrix"], float))


def smoothing_kernel(space: SpaceModel, width: float, rank: int, gain: float) -> np.ndarray:
    s = np.arange(space.dim) * space.step
    G = np.exp(-0.5 * ((s[:, None] - s[None, :]) / width) ** 2) * space.step
    w, V = np.linalg.eigh(G)
    top = np.argsort(w)[::-1][:rank]
    Gr = (V[:, top] * w[top]) @ V[:, top].T
    Gr = 0.5 * (Gr + Gr.T)
    return Gr * (gain / np.abs(Gr).sum(axis=1).max())


def apply_operator(op: OperatorSpec, M: PointCloud) -> PointCloud:
    if M.space != op.space:
        raise SpaceMismatch("cloud and operator live in different spaces")
    return M.with_points(op(M.points), label=f"F({M.label})")


def plain_iteration(op: OperatorSpec, x0, steps: int) -> np.ndarray:
    x = np.asarray(x0, dtype=float)
    for _ in range(steps):
        x = op(x)
    return x


# --- upper characteristic and condensing -----------------------------------------

@dataclass
class UpperCharEstimate:
    gamma: float
    witness: int | None
    ratios: list[float]
    slack: float
    skipped: list[int]

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "witness": self.witness, "ratios": self.ratios,
                "slack": self.slack, "skipped": self.skipped}


def estimate_upper_char(op: OperatorSpec, trial_sets: Sequence[PointCloud], eps_grid,
                        max_centers: int = 3, metric: FNormMetric | None = None) -> UpperCharEstimate:
    """``max upper(F(M)) / lower(M)`` over the trials.

    This over-estimates the ratio on the tested sets; it does not bound the
    characteristic over all bounded sets.
    """
    metric = metric or build_fnorm(op.space, "gauge")
    ratios, skipped, slack = [], [], 0.0
    best, wit = -math.inf, None
    for i, M in enumerate(trial_sets):
        bM = alpha_bounds(metric, M, eps_grid, max_centers)
        if bM.lower <= 0:
            log.warning("trial %d has zero lower bound at this grid; skipped", i)
            skipped.append(i)
            continue
        bF = alpha_bounds(metric, apply_operator(op, M), eps_grid, max_centers)
        r = bF.upper / bM.lower
        ratios.append(r)
        slack = max(slack, bM.ratio - 1.0)
        if r > best:
            best, wit = r, i
    return UpperCharEstimate(best if ratios else math.nan, wit, ratios, slack, skipped)


@dataclass
class CondensingReport:
    verdict: str
    trials: list[dict]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "trials": self.trials}


def _translate_of(A: np.ndarray, B: np.ndarray, tol: float = 1e-12) -> bool:
    """Is ``B = A + c`` for a single vector ``c``?"""
    diff = B - A
    return bool(np.all(np.abs(diff - diff[0]) <= tol * (1 + np.abs(A))))


def sadovskii_check(op: OperatorSpec, trial_sets: Sequence[PointCloud], eps_grid,
                    max_centers: int = 3, metric: FNormMetric | None = None) -> CondensingReport:
    """Per-trial verdicts on ``alpha(F(M)) < alpha(M)``.

    ``condensing`` needs ``upper(F(M)) < lower(M)``. ``not condensing`` needs a
    certificate the other way: ``lower(F(M)) >= upper(M)``, or ``F(M)`` being a
    translate of ``M`` (equal measure) while ``lower(M) > 0``. Anything else is
    ``inconclusive``.
    """
    metric = metric or build_fnorm(op.space, "gauge")
    rows = []
    for i, M in enumerate(trial_sets):
        FM = apply_operator(op, M)
        bM = alpha_bounds(metric, M, eps_grid, max_centers)
        bF = alpha_bounds(metric, FM, eps_grid, max_centers)
        if bM.lower <= 0:
            verdict = "inconclusive"
        elif bF.upper < bM.lower:
            verdict = "condensing"
        elif bF.lower >= bM.upper or _translate_of(M.points, FM.points):
            verdict = "not condensing"
        else:
            verdict = "inconclusive"
        rows.append({"trial": i, "verdict": verdict, "lower_M": bM.lower, "upper_M": bM.upper,
                     "lower_FM": bF.lower, "upper_FM": bF.upper, "slack_ratio": bM.ratio})
    verdicts = {r["verdict"] for r in rows}
    if "not condensing" in verdicts:
        overall = "not condensing"
    elif verdicts == {"condensing"}:
        overall = "condensing"
    else:
        overall = "inconclusive"
    return CondensingReport(overall, rows)


# --- Darbo iteration -------------------------------------------------------------

@dataclass
class DarboTrace:
    iterations: list[dict]
    x_star: np.ndarray
    residual: float
    converged: bool
    plain_steps: int
    tol: float
    resolution: int
    gamma_hat: float | None = None

    def alphas(self) -> np.ndarray:
        return np.array([row["alpha_upper"] for row in self.iterations])

    def emit(self, op: OperatorSpec, metric: FNormMetric) -> dict:
        """Serialisable trace; the residual is recomputed here."""
        self.residual = float(metric(self.x_star, op(self.x_star)))
        return {"iterations": self.iterations, "x_star": self.x_star.tolist(),
                "residual": self.residual, "converged": self.converged and self.residual < self.tol,
                "plain_steps": self.plain_steps, "tol": self.tol, "resolution": self.resolution,
                "gamma_hat": self.gamma_hat}


def verify_invariance(op: OperatorSpec, M0: PointCloud) -> list[int]:
    """Indices of sample points whose image leaves ``co(M0)``."""
    images = op(M0.points)
    return [i for i, y in enumerate(images) if not _lp.in_hull(M0.points, y)]


def thin(metric: FNormMetric, P: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """Farthest-point subsample of size ``k`` and the covering radius it leaves."""
    if len(P) <= k:
        return P, 0.0
    idx, radius, _ = farthest_point_centers(metric, P, k)
    return P[idx], radius


def darbo_solve(op: OperatorSpec, M0: PointCloud, tol: float = 1e-6, max_iter: int = 60,
                resolution: int = 2, cloud_size: int | None = None, metric: FNormMetric | None = None,
                check_nesting: bool = True, max_plain: int = 1000,
                trials: Sequence[PointCloud] | None = None, eps_grid=None) -> DarboTrace:
    """Iterate ``M_{n+1} = thin(hull_grid(F(M_n)))`` and extract a fixed point.

    The per-step ``alpha_upper`` is the verified one-centre covering radius
    (a Chebyshev radius in gauge mode), which bounds the MNC from above and
    cannot grow by more than the sup-Lipschitz constant of ``F`` per step.
    After the sets have shrunk below ``tol`` (or ``max_iter`` is hit), plain
    iteration from the barycentre finishes the job and the residual
    ``d(x, F(x))`` is the certificate.
    """
    if M0.space != op.space:
        raise SpaceMismatch("cloud and operator live in different spaces")
    metric = metric or build_fnorm(op.space, "gauge")
    bad = verify_invariance(op, M0)
    if bad:
        raise InvarianceError(f"F maps sample points {bad[:5]} outside co(M0)")
    gamma = None
    if trials:
        est = estimate_upper_char(op, trials, eps_grid, metric=metric)
        gamma = est.gamma
        if not gamma < 1:
            raise ValueError(f"operator is not alpha-contractive on the trials (gamma={gamma})")
    cloud_size = cloud_size or len(M0)
    M = M0.points
    rows = []
    converged = False
    for n in range(max_iter + 1):
        b = _one_center(metric, M0.space, M)
        row = {"n": n, "size": len(M), "alpha_upper": b, "diameter_upper": 2 * b}
        if rows:
            row["thinning_gap"] = gap
            row["nesting_defect"] = defect
        rows.append(row)
        if 2 * b < tol:
            converged = True
            break
        if n == max_iter:
            break
        image = PointCloud(op(M), op.space)
        H = hull_sample(image, resolution).points
        new, gap = thin(metric, H, cloud_size)
        defect = _nesting_defect(metric, new, M) if check_nesting else None
        M = new
    x = M.mean(axis=0)
    steps = 0
    while steps < max_plain and float(metric(x, op(x))) >= tol:
        x = op(x)
        steps += 1
    residual = float(metric(x, op(x)))
    return DarboTrace(rows, x, residual, residual < tol, steps, tol, resolution, gamma)


def _one_center(metric: FNormMetric, space: SpaceModel, P: np.ndarray) -> float:
    if len(P) < 2:
        return 0.0
    if metric.mode == "gauge":
        c, r = _lp.chebyshev_center(space, metric.caps, P)
        return float(metric(P, c).max())
    return float(metric.pairwise(P[:1], P).max())


def _nesting_defect(metric: FNormMetric, new: np.ndarray, old: np.ndarray) -> float:
    """Largest distance from a new point to ``co(old)`` (exact, gauge mode)."""
    if metric.mode != "gauge":
        return math.nan
    worst = 0.0
    for x in new:
        d, _ = _lp.distance_to_hull(metric.space, metric.caps, old, x)
        worst = max(worst, d * 2.0 ** -metric.n0)
    return worst


def cross_polytope(space: SpaceModel, center, radius: float) -> PointCloud:
    center = space.check(center)
    E = np.eye(space.dim) * radius
    return PointCloud(np.vstack([center + E, center - E]), space, f"X({radius})")


def box_vertices(space: SpaceModel, center, radius: float) -> PointCloud:
    center = space.check(center)
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * space.dim, indexing="ij")).reshape(space.dim, -1).T
    return PointCloud(center + radius * signs, space, f"box({radius})")


def invariant_radius(op: OperatorSpec) -> float:
    """Radius of an l1 ball about 0 mapped into itself (for symmetric kernels)."""
    f0 = np.abs(op(np.zeros(op.space.dim))).sum()
    L = op.lipschitz_sup
    if L >= 1:
        raise ValueError("operator is not a contraction")
    return 2.0 * f0 / (1.0 - L) if f0 > 0 else 1.0
