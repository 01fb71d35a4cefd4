"""Translation-invariant metrics on a :class:`SpaceModel`.

Three modes:

``standard``
    ``sum_k 2**-k * p_k(y - x) / (1 + p_k(y - x))``, the textbook metrizing
    metric. Translation invariant but it does not scale down with ``lambda``.
``gauge``
    ``gauge_U(y - x) * 2**-n0`` where ``U`` is the box cut out by the caps.
    Positively homogeneous, so ``d(lx, ly) = l d(x, y)`` holds with equality.
``paper``
    The dyadic pseudonorm ``|x| = min{p_H : x in V_H}``, ``V_n = 2**(n0-n) U``,
    ``V_H = sum_{n in H} V_n``, ``p_H = sum_{n in H} 2**-n``, with ``H`` ranging
    over subsets of ``{1..depth}``. Points in no ``V_H`` get ``cap_value``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _lp
from .space import SpaceMismatch, SpaceModel

MODES = ("standard", "gauge", "paper")
MAX_DEPTH = 52  # p_H stays exactly representable in binary64


class NotLocallyConvex(ValueError):
    pass


@dataclass(frozen=True)
class FNormMetric:
    mode: str
    space: SpaceModel
    caps: tuple[float, ...]
    n0: int = 0
    depth: int = 8
    cap_value: float = 1.0

    def gauge(self, z) -> np.ndarray:
        """Minkowski gauge of the caps box ``U``."""
        return np.max(self.space.seminorms(z) / np.asarray(self.caps), axis=-1)

    def fnorm(self, z) -> np.ndarray:
        z = self.space.check(z)
        if self.mode == "standard":
            s = self.space.seminorms(z)
            w = 2.0 ** -np.arange(1, self.space.m + 1)
            return (s / (1.0 + s)) @ w
        g = self.gauge(z) * 2.0 ** -self.n0
        if self.mode == "gauge":
            return g
        return paper_quantize(g, self.depth, self.cap_value)

    def __call__(self, x, y) -> np.ndarray:
        x = self.space.check(x)
        y = self.space.check(y)
        return self.fnorm(y - x)

    def pairwise(self, A, B) -> np.ndarray:
        A = np.atleast_2d(A)
        B = np.atleast_2d(B)
        return self.fnorm(B[None, :, :] - A[:, None, :])

    def to_dict(self) -> dict:
        return {"mode": self.mode, "space": self.space.to_dict(), "caps": list(self.caps),
                "n0": self.n0, "depth": self.depth, "cap_value": self.cap_value}

    @property
    def valid_radius(self) -> float:
        """Largest pseudonorm value below the cap in paper mode."""
        return 1.0 - 2.0 ** -self.depth


def build_fnorm(space: SpaceModel, mode: str = "gauge", caps: Sequence[float] | None = None,
                n0: int = 0, depth: int = 8, cap_value: float | None = None) -> FNormMetric:
    if mode not in MODES:
        raise ValueError(f"unknown metric mode {mode!r}")
    caps = tuple(float(c) for c in (caps if caps is not None else [1.0] * space.m))
    if len(caps) != space.m or min(caps) <= 0:
        raise ValueError("caps must be m positive numbers")
    if mode != "standard" and not space.locally_convex:
        raise NotLocallyConvex("gauge/paper metrics need a locally convex space; "
                               "the V_n would not be convex")
    if n0 < 0 or depth < n0 + 1:
        raise ValueError("need n0 >= 0 and depth >= n0 + 1")
    if depth > MAX_DEPTH:
        raise ValueError(f"depth is limited to {MAX_DEPTH}")
    return FNormMetric(mode, space, caps, int(n0), int(depth),
                       1.0 if cap_value is None else float(cap_value))


def standard_metric(space: SpaceModel, x, y) -> float:
    return build_fnorm(space, "standard")(x, y)


def fnorm_eval(fnorm: FNormMetric, x):
    return fnorm.fnorm(x)


def metric_eval(fnorm: FNormMetric, x, y):
    return fnorm(x, y)


# --- paper-mode pseudonorm ---------------------------------------------------

def paper_quantize(g, depth: int, cap_value: float):
    """Least ``p_H >= g`` over ``H`` in ``{1..depth}``; 0 at 0, cap past the top.

    Closed form of :func:`least_dyadic_cover`: every multiple of ``2**-depth``
    in ``(0, 1)`` is some ``p_H``.
    """
    g = np.asarray(g, dtype=float)
    scale = 2.0 ** depth
    q = np.ceil(g * scale) / scale
    out = np.where(g > 1.0 - 1.0 / scale, cap_value, q)
    return np.where(g == 0.0, 0.0, out)


def least_dyadic_cover(target: float, depth: int) -> tuple[float, tuple[int, ...]] | None:
    """Branch and bound for ``min p_H`` subject to ``p_H >= target``.

    Returns ``(p_H, H)`` or ``None`` when no subset reaches ``target``.
    """
    if target <= 0:
        return 0.0, ()
    best: list = [math.inf, None]

    def rec(n: int, s: float, chosen: tuple[int, ...]):
        if s >= target:
            if s < best[0]:
                best[0], best[1] = s, chosen
            return
        if n > depth or s >= best[0]:
            return
        # remaining mass from n..depth is 2**(1-n) - 2**-depth
        if s + (2.0 ** (1 - n) - 2.0 ** -depth) < target:
            return
        # include n first: the bigger part gets near the target fastest
        rec(n + 1, s + 2.0 ** -n, chosen + (n,))
        rec(n + 1, s, chosen)

    rec(1, 0.0, ())
    return None if best[1] is None else (best[0], best[1])


def enumerate_pH(depth: int) -> np.ndarray:
    """All ``p_H`` for nonempty ``H`` in ``{1..depth}`` (exhaustive)."""
    vals = np.zeros(1)
    for n in range(1, depth + 1):
        vals = np.concatenate([vals, vals + 2.0 ** -n])
    return np.sort(vals[1:])


def member_VH_shortcut(fnorm: FNormMetric, H: Iterable[int], x) -> bool:
    H = _check_H(fnorm, H)
    pH = sum(2.0 ** -n for n in H)
    return bool(fnorm.gauge(x) <= 2.0 ** fnorm.n0 * pH)


def member_VH_decomposition(fnorm: FNormMetric, H: Iterable[int], x) -> bool:
    """Membership by solving ``x = sum_{n in H} x_n, x_n in V_n`` as an LP."""
    H = _check_H(fnorm, H)
    radii = [2.0 ** (fnorm.n0 - n) for n in H]
    return _lp.decomposition_feasible(fnorm.space, fnorm.caps, radii, fnorm.space.check(x))


def member_VH(fnorm: FNormMetric, H: Iterable[int], x, check: bool = True, tol: float = 1e-9) -> bool:
    """``x in V_H``; with ``check`` the LP route must agree away from the boundary."""
    H = _check_H(fnorm, H)
    fast = member_VH_shortcut(fnorm, H, x)
    if check:
        slow = member_VH_decomposition(fnorm, H, x)
        pH = sum(2.0 ** -n for n in H)
        margin = abs(fnorm.gauge(x) - 2.0 ** fnorm.n0 * pH)
        if fast != slow and margin > tol:
            raise AssertionError(f"V_H membership routes disagree for H={H}")
    return fast


def _check_H(fnorm: FNormMetric, H) -> tuple[int, ...]:
    H = tuple(sorted(set(int(n) for n in H)))
    if not H:
        raise ValueError("H must be nonempty")
    if H[0] < 1 or H[-1] > fnorm.depth:
        raise ValueError(f"H must lie in 1..{fnorm.depth}")
    return H


def paper_fnorm_exhaustive(fnorm: FNormMetric, x) -> float:
    """Reference pseudonorm by enumerating every ``H`` (use for depth <= 16)."""
    g = float(fnorm.gauge(x))
    if g == 0.0:
        return 0.0
    pH = enumerate_pH(fnorm.depth)
    ok = pH[g <= 2.0 ** fnorm.n0 * pH]
    return float(ok.min()) if ok.size else fnorm.cap_value


# --- audits ------------------------------------------------------------------

@dataclass
class AuditReport:
    name: str
    max_margin: float
    tolerance: float
    samples: int
    witness: dict | None = None
    regions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_margin <= self.tolerance

    def to_dict(self) -> dict:
        return {"name": self.name, "max_margin": self.max_margin, "tolerance": self.tolerance,
                "samples": self.samples, "passed": self.passed, "witness": self.witness,
                "regions": self.regions}


def _worst(name, margins, tol, witness_fn, regions=None) -> AuditReport:
    margins = np.asarray(margins, dtype=float).ravel()
    if margins.size == 0:
        return AuditReport(name, -math.inf, tol, 0, None, regions or {})
    i = int(np.argmax(margins))
    return AuditReport(name, float(margins[i]), tol, int(margins.size), witness_fn(i), regions or {})


def audit_scaling(fnorm: FNormMetric, samples, lambdas, tol: float = 1e-12) -> AuditReport:
    """Worst ``d(lx, ly) - l d(x, y)`` over sample pairs ``(x, y)`` and ``lambdas``.

    ``samples`` has shape ``(n, 2, dim)``. Margins are split by region: pairs
    whose distance is below the paper-mode cap (``inside``) and the rest.
    """
    S = fnorm.space.check(samples)
    lam = np.asarray(lambdas, dtype=float)
    if np.any((lam < 0) | (lam > 1)):
        raise ValueError("lambdas must lie in [0, 1]")
    x, y = S[:, 0], S[:, 1]
    d = fnorm(x, y)
    lhs = fnorm(lam[:, None, None] * x, lam[:, None, None] * y)
    margin = lhs - lam[:, None] * d
    if fnorm.mode == "paper":
        inside = fnorm.gauge(y - x) * 2.0 ** -fnorm.n0 <= fnorm.valid_radius
    else:
        inside = np.ones(len(S), dtype=bool)
    regions = {}
    for name, mask in (("inside", inside), ("capped", ~inside)):
        sub = margin[:, mask]
        regions[name] = {"count": int(sub.size),
                         "max_margin": float(sub.max()) if sub.size else None}
    masked = np.where(inside[None, :], margin, -np.inf)
    li, si = np.unravel_index(int(np.argmax(masked)), masked.shape)
    worst = float(masked[li, si])
    witness = None if worst == -np.inf else {
        "lambda": float(lam[li]), "x": x[si].tolist(), "y": y[si].tolist()}
    return AuditReport("scaling", worst, tol, int(margin.size), witness, regions)


def audit_additive(metric: FNormMetric, quadruples, tol: float = 1e-12) -> AuditReport:
    """Worst ``d(x1 + x2, y1 + y2) - d(x1, y1) - d(x2, y2)``; ``quadruples`` is ``(n, 4, dim)``."""
    Q = metric.space.check(quadruples)
    x1, x2, y1, y2 = Q[:, 0], Q[:, 1], Q[:, 2], Q[:, 3]
    margin = metric(x1 + x2, y1 + y2) - metric(x1, y1) - metric(x2, y2)
    return _worst("additive", margin, tol, lambda i: {"quadruple": Q[i].tolist()})


def audit_axioms(metric: FNormMetric, triples, tol: float = 1e-12) -> dict[str, AuditReport]:
    """Triangle inequality, symmetry, translation invariance and ``d(x, x) = 0``."""
    T = metric.space.check(triples)
    x, y, z = T[:, 0], T[:, 1], T[:, 2]
    dxy, dyz, dxz = metric(x, y), metric(y, z), metric(x, z)
    return {
        "triangle": _worst("triangle", dxz - dxy - dyz, tol, lambda i: {"triple": T[i].tolist()}),
        "symmetry": _worst("symmetry", np.abs(dxy - metric(y, x)), tol, lambda i: {"pair": T[i, :2].tolist()}),
        "translation": _worst("translation", np.abs(metric(x + z, y + z) - dxy), tol,
                              lambda i: {"triple": T[i].tolist()}),
        "identity": _worst("identity", metric(x, x), tol, lambda i: {"x": x[i].tolist()}),
        # 1.0 flags a distinct pair at distance zero
        "positivity": _worst("positivity", (dxy[np.any(x != y, axis=-1)] <= 0).astype(float), 0.0,
                             lambda i: None),
    }


def lp_counterexample(p: float, lam: float, x, y, step: float = 1.0) -> tuple[float, float, bool]:
    """``(d(lx, ly), l d(x, y), violated)`` for the ``int |.|**p`` metric.

    For ``0 < p < 1`` the left side equals ``l**p d(x, y)``, which beats ``l d(x, y)``.
    """
    if not 0 < p <= 1:
        raise ValueError("the counterexample needs 0 < p <= 1")
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        raise ValueError("x and y must differ")

    def d(a, b):
        return float(np.sum(np.abs(b - a) ** p) * step)

    lhs = d(lam * x, lam * y)
    rhs = lam * d(x, y)
    return lhs, rhs, bool(lhs > rhs)


def sample_pairs(space: SpaceModel, n: int, rng: np.random.Generator, k: int = 2, scale: float = 1.0):
    return scale * rng.uniform(-1.0, 1.0, size=(n, k, space.dim))


def dyadic_value_set(fnorm: FNormMetric) -> set[float]:
    """Every value the paper-mode pseudonorm may take."""
    return set(enumerate_pH(fnorm.depth).tolist()) | {0.0, fnorm.cap_value}


def all_subsets(depth: int):
    for r in range(1, depth + 1):
        yield from itertools.combinations(range(1, depth + 1), r)
