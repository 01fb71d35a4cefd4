"""Truncated models of Frechet spaces and their seminorm families.

Three kinds are supported:

* ``c-grid``: continuous functions on a grid, ``p_k`` is the sup of ``|x_i|``
  over the first ``ceil(k * dim / m)`` grid points (nested sups).
* ``seq-product``: a product of l1 factors, ``p_k`` is the l1 norm of block k.
* ``lp-grid``: the single functional ``q(x) = sum |x_i|**p * step``. For
  ``p < 1`` this is subadditive but not homogeneous, so the space is not
  locally convex.

Vectors are plain numpy arrays of length ``dim``; a point cloud is a 2-D array
wrapped in :class:`PointCloud` together with its space.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

KINDS = ("c-grid", "seq-product", "lp-grid")


class SpaceMismatch(ValueError):
    """Raised when a vector or cloud does not live in the expected space."""


@dataclass(frozen=True)
class Seminorm:
    """One member of a seminorm family: ``sup`` or weighted ``l1`` over an index set,
    or the non-homogeneous ``lp`` power sum."""

    kind: str
    index: tuple[int, ...]
    weights: tuple[float, ...] | None = None
    p: float = 1.0


@dataclass(frozen=True)
class SpaceModel:
    kind: str
    dim: int
    m: int
    step: float = 1.0
    blocks: tuple[int, ...] | None = None
    p: float = 1.0
    seminorm_family: tuple[Seminorm, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.dim < 1 or self.m < 1:
            raise ValueError("dim and m must be positive")
        if self.dim < self.m:
            raise ValueError(f"need dim >= m, got dim={self.dim}, m={self.m}")
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.kind == "lp-grid":
            if not 0 < self.p <= 1:
                raise ValueError(f"lp-grid exponent must lie in (0, 1], got {self.p}")
            if self.m != 1:
                raise ValueError("lp-grid carries a single functional (m=1)")
        if self.kind == "seq-product":
            blocks = self.blocks
            if blocks is None:
                if self.dim % self.m:
                    raise ValueError("blocks required when m does not divide dim")
                blocks = (self.dim // self.m,) * self.m
            blocks = tuple(int(b) for b in blocks)
            if len(blocks) != self.m or sum(blocks) != self.dim or min(blocks) < 1:
                raise ValueError(f"blocks {blocks} do not partition dim={self.dim} into m={self.m}")
            object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "seminorm_family", self._family())

    def _family(self) -> tuple[Seminorm, ...]:
        if self.kind == "c-grid":
            return tuple(
                Seminorm("sup", tuple(range(math.ceil(k * self.dim / self.m))))
                for k in range(1, self.m + 1)
            )
        if self.kind == "seq-product":
            out, start = [], 0
            for b in self.blocks:
                out.append(Seminorm("l1", tuple(range(start, start + b)), (1.0,) * b))
                start += b
            return tuple(out)
        idx = tuple(range(self.dim))
        if self.p == 1.0:
            return (Seminorm("l1", idx, (self.step,) * self.dim),)
        return (Seminorm("lp", idx, (self.step,) * self.dim, self.p),)

    @property
    def locally_convex(self) -> bool:
        return not (self.kind == "lp-grid" and self.p < 1)

    @property
    def params(self) -> dict[str, Any]:
        if self.kind == "c-grid":
            return {"step": self.step}
        if self.kind == "seq-product":
            return {"blocks": list(self.blocks)}
        return {"p": self.p, "step": self.step}

    def check(self, x) -> np.ndarray:
        """Return ``x`` as a float array whose last axis has length ``dim``."""
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise SpaceMismatch(f"expected vectors of length {self.dim}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("vectors must have finite entries")
        return arr

    def seminorms(self, x) -> np.ndarray:
        """All seminorm values, shape ``x.shape[:-1] + (m,)``."""
        x = self.check(x)
        ax = np.abs(x)
        cols = []
        for s in self.seminorm_family:
            sub = ax[..., list(s.index)]
            if s.kind == "sup":
                cols.append(sub.max(axis=-1))
            elif s.kind == "l1":
                cols.append(sub @ np.asarray(s.weights))
            else:
                cols.append((sub ** s.p) @ np.asarray(s.weights))
        return np.stack(cols, axis=-1)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "dim": self.dim, "m": self.m, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SpaceModel":
        return make_space(d["kind"], d["dim"], d["m"], d.get("params", {}))


def make_space(kind: str, dim: int, m: int, params: dict[str, Any] | None = None) -> SpaceModel:
    params = dict(params or {})
    kw: dict[str, Any] = {}
    if "step" in params:
        kw["step"] = float(params.pop("step"))
    if "blocks" in params:
        kw["blocks"] = tuple(params.pop("blocks"))
    if "p" in params:
        kw["p"] = float(params.pop("p"))
    if params:
        raise ValueError(f"unknown space params {sorted(params)}")
    return SpaceModel(kind, int(dim), int(m), **kw)


def seminorm_eval(space: SpaceModel, k: int, x) -> float | np.ndarray:
    """Value of the k-th seminorm (1-based)."""
    if not 1 <= k <= space.m:
        raise IndexError(f"seminorm index {k} outside 1..{space.m}")
    return space.seminorms(x)[..., k - 1]


@dataclass
class PointCloud:
    points: np.ndarray
    space: SpaceModel
    label: str = ""
    empty: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            if not self.empty:
                raise ValueError("empty point cloud must be flagged empty=True")
            pts = pts.reshape(0, self.space.dim)
        pts = self.space.check(pts)
        if pts.ndim != 2:
            raise ValueError("a point cloud is a 2-D array of points")
        self.points = pts

    def __len__(self):
        return len(self.points)

    def with_points(self, points, label: str | None = None) -> "PointCloud":
        return PointCloud(points, self.space, self.label if label is None else label,
                          empty=len(points) == 0)

    def to_dict(self) -> dict[str, Any]:
        return {"space": self.space.to_dict(), "points": self.points.tolist(), "label": self.label}

    @classmethod
    def from_dict(cls, d: dict[str, Any], space: SpaceModel | None = None) -> "PointCloud":
        sp = SpaceModel.from_dict(d["space"]) if space is None else space
        pts = d["points"]
        return cls(np.asarray(pts, dtype=float).reshape(-1, sp.dim), sp, d.get("label", ""),
                   empty=len(pts) == 0)


def same_space(*clouds: PointCloud) -> SpaceModel:
    spaces = {c.space for c in clouds}
    if len(spaces) != 1:
        raise SpaceMismatch("point clouds live in different spaces")
    return clouds[0].space


def load_json(path) -> dict[str, Any]:
    with open(path) as fh:
        return json.load(fh)


def shipped_spaces() -> list[SpaceModel]:
    """The space models every suite runs against."""
    return [
        make_space("c-grid", 8, 4, {"step": 0.25}),
        make_space("c-grid", 16, 4, {"step": 0.25}),
        make_space("c-grid", 32, 8, {"step": 0.125}),
        make_space("seq-product", 6, 3, {"blocks": [2, 2, 2]}),
        make_space("seq-product", 12, 4, {"blocks": [2, 3, 3, 4]}),
        make_space("lp-grid", 4, 1, {"p": 1.0, "step": 1.0}),
        make_space("lp-grid", 4, 1, {"p": 0.5, "step": 1.0}),
    ]


def random_vectors(space: SpaceModel, n: int, rng: np.random.Generator, scale: float = 1.0,
                   shape: Sequence[int] = ()) -> np.ndarray:
    return scale * rng.uniform(-1.0, 1.0, size=(*shape, n, space.dim))
