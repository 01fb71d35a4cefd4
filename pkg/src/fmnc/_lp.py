"""Small linear-programming helpers for gauges of seminorm boxes.

For a caps vector ``c`` the set ``U = {x : p_k(x) <= c_k}`` is a polytope for
``sup`` and ``l1`` seminorms, so ``gauge_U(z) <= r`` is a system of linear
inequalities in ``z`` and ``r`` (with auxiliary absolute-value variables for l1
seminorms). The builders below use that to decide Minkowski-sum membership,
distance to a convex hull and Chebyshev centres.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .space import SpaceModel


class _LP:
    def __init__(self):
        self.nvar = 0
        self.ub: list[tuple[dict[int, float], float]] = []
        self.eq: list[tuple[dict[int, float], float]] = []
        self.bounds: list[tuple[float | None, float | None]] = []

    def add_vars(self, k: int, lo=None, hi=None) -> np.ndarray:
        idx = np.arange(self.nvar, self.nvar + k)
        self.nvar += k
        self.bounds.extend([(lo, hi)] * k)
        return idx

    def gauge_le(self, space: SpaceModel, caps, expr, radius):
        """Constrain ``gauge_U(z) <= radius`` for ``z_i = sum(coef * var) + const``.

        ``expr`` is a list (one per coordinate) of ``(dict var->coef, const)``;
        ``radius`` is a float or ``("var", index)``.
        """
        need_abs = any(s.kind == "l1" for s in space.seminorm_family)
        aux = self.add_vars(space.dim, 0.0, None) if need_abs else None
        if need_abs:
            for i, (coefs, const) in enumerate(expr):
                for sign in (1.0, -1.0):
                    row = {j: sign * v for j, v in coefs.items()}
                    row[int(aux[i])] = row.get(int(aux[i]), 0.0) - 1.0
                    self.ub.append((row, -sign * const))
        for s, c in zip(space.seminorm_family, caps):
            if s.kind == "sup":
                for i in s.index:
                    coefs, const = expr[i]
                    for sign in (1.0, -1.0):
                        row = {j: sign * v for j, v in coefs.items()}
                        rhs = -sign * const
                        if isinstance(radius, tuple):
                            row[radius[1]] = row.get(radius[1], 0.0) - c
                        else:
                            rhs += c * radius
                        self.ub.append((row, rhs))
            elif s.kind == "l1":
                row = {int(aux[i]): w for i, w in zip(s.index, s.weights)}
                rhs = 0.0
                if isinstance(radius, tuple):
                    row[radius[1]] = row.get(radius[1], 0.0) - c
                else:
                    rhs = c * radius
                self.ub.append((row, rhs))
            else:
                raise ValueError("gauge LPs need a locally convex space")

    def _dense(self, rows):
        if not rows:
            return None, None
        A = np.zeros((len(rows), self.nvar))
        b = np.zeros(len(rows))
        for r, (coefs, rhs) in enumerate(rows):
            for j, v in coefs.items():
                A[r, j] += v
            b[r] = rhs
        return A, b

    def solve(self, objective: dict[int, float] | None = None):
        c = np.zeros(self.nvar)
        for j, v in (objective or {}).items():
            c[j] = v
        A_ub, b_ub = self._dense(self.ub)
        A_eq, b_eq = self._dense(self.eq)
        return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                       bounds=self.bounds, method="highs")


def decomposition_feasible(space: SpaceModel, caps, radii, x) -> bool:
    """Is ``x = sum_n x_n`` with ``gauge_U(x_n) <= radii[n]`` feasible?"""
    lp = _LP()
    parts = [lp.add_vars(space.dim) for _ in radii]
    for xs, r in zip(parts, radii):
        lp.gauge_le(space, caps, [({int(j): 1.0}, 0.0) for j in xs], float(r))
    for i in range(space.dim):
        lp.eq.append(({int(xs[i]): 1.0 for xs in parts}, float(x[i])))
    res = lp.solve()
    return res.status == 0


def distance_to_hull(space: SpaceModel, caps, generators: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact ``min gauge_U(x - z)`` over ``z`` in the convex hull of ``generators``.

    Returns the distance and the barycentric weights of the minimiser.
    """
    generators = np.atleast_2d(generators)
    # the gauge is translation invariant and homogeneous: recentre and rescale
    # so the solver sees O(1) data
    shift = generators.mean(axis=0)
    scale = float(np.abs(np.vstack([generators, x[None]]) - shift).max())
    if scale == 0.0:
        return 0.0, np.full(len(generators), 1.0 / len(generators))
    generators = (generators - shift) / scale
    x = (x - shift) / scale
    lp = _LP()
    lam = lp.add_vars(len(generators), 0.0, None)
    t = int(lp.add_vars(1, 0.0, None)[0])
    expr = [({int(l): float(-generators[k, i]) for k, l in enumerate(lam)}, float(x[i]))
            for i in range(space.dim)]
    lp.gauge_le(space, caps, expr, ("var", t))
    lp.eq.append(({int(l): 1.0 for l in lam}, 1.0))
    res = lp.solve({t: 1.0})
    if res.status != 0:
        raise RuntimeError(f"hull distance LP failed: {res.message}")
    return float(res.x[t]) * scale, res.x[lam]


def chebyshev_center(space: SpaceModel, caps, points: np.ndarray) -> tuple[np.ndarray, float]:
    """Centre minimising the largest gauge distance to ``points``."""
    points = np.atleast_2d(points)
    if all(s.kind == "sup" for s in space.seminorm_family):
        # weighted sup norm: coordinatewise midrange is optimal
        w = _sup_weights(space, caps)
        lo, hi = points.min(axis=0), points.max(axis=0)
        center = 0.5 * (lo + hi)
        return center, float(np.max(0.5 * (hi - lo) / w))
    shift = points.mean(axis=0)
    scale = float(np.abs(points - shift).max())
    if scale == 0.0:
        return points[0].copy(), 0.0
    points = (points - shift) / scale
    lp = _LP()
    c = lp.add_vars(space.dim)
    t = int(lp.add_vars(1, 0.0, None)[0])
    for p in points:
        expr = [({int(c[i]): -1.0}, float(p[i])) for i in range(space.dim)]
        lp.gauge_le(space, caps, expr, ("var", t))
    res = lp.solve({t: 1.0})
    if res.status != 0:
        raise RuntimeError(f"Chebyshev centre LP failed: {res.message}")
    return res.x[c] * scale + shift, float(res.x[t]) * scale


def _sup_weights(space: SpaceModel, caps) -> np.ndarray:
    """Per-coordinate weights so that ``gauge_U(z) = max_i |z_i| / w_i``."""
    w = np.full(space.dim, np.inf)
    for s, c in zip(space.seminorm_family, caps):
        idx = list(s.index)
        w[idx] = np.minimum(w[idx], c)
    return w


def in_hull(generators: np.ndarray, x: np.ndarray) -> bool:
    """Plain convex-hull membership by linear feasibility."""
    generators = np.atleast_2d(generators)
    n = len(generators)
    A_eq = np.vstack([generators.T, np.ones((1, n))])
    b_eq = np.concatenate([x, [1.0]])
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    return res.status == 0
