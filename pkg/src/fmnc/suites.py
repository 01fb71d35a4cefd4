"""Check suites behind ``fmnc suite``; each returns a list of :class:`Check`."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import convexity as cx
from . import metric as mt
from . import mnc
from .fixedpoint import (OperatorSpec, cross_polytope, darbo_solve, estimate_upper_char,
                         invariant_radius, plain_iteration, sadovskii_check)
from .report import Check
from .space import PointCloud, SpaceModel, make_space, shipped_spaces

ANCHORS = {
    "additive-inequality": "d(x1 + x2, y1 + y2) <= d(x1, y1) + d(x2, y2) for translation-invariant d",
    "frechet-metric-construction": "dyadic pseudonorm from a halving base V_n of absolutely convex sets",
    "scaling-inequality": "d(l x, l y) <= l d(x, y) for l in [0, 1]",
    "lp-counterexample": "int |.|^p metric with 0 < p < 1 scales like l^p",
    "hausdorff-mnc-definition": "alpha(M) = inf{eps : M has a finite eps-net in E}",
    "mnc-properties": "monotone, closure, translation, homogeneity, precompactness, sums, unions, balls, nested sets",
    "hull-invariance": "alpha(co M) = alpha(M) via an (eta + eps)-net of the hull",
    "convex-structures": "two- and three-point linear convex structures, stability, properties (P) and (Q)",
    "fixed-point-theorems": "upper characteristic, Darbo iteration, condensing operators",
}

SUITES = ("metric", "convexity", "mnc", "hull-invariance", "fixedpoint", "counterexample", "all")


@dataclass
class RunConfig:
    seed: int = 42
    samples: int = 1000
    depth: int = 8
    eps: float = 0.1
    tol: float = 1e-6
    resolution: int = 3
    max_iter: int = 60
    stability_samples: int = 300
    cloud_count: int = 50
    max_centers: int = 3
    spaces: list[SpaceModel] = field(default_factory=shipped_spaces)

    def header(self) -> dict:
        d = asdict(self)
        d["spaces"] = [s.to_dict() for s in self.spaces]
        return d


def slug(space: SpaceModel) -> str:
    extra = f"-p{space.p:g}" if space.kind == "lp-grid" else ""
    return f"{space.kind}-{space.dim}-{space.m}{extra}"


def cluster_cloud(space: SpaceModel, rng: np.random.Generator, clusters: int, per: int,
                  spread: float = 0.05, box: float = 2.0, label: str = "") -> PointCloud:
    C = rng.uniform(-box, box, (clusters, space.dim))
    P = C[:, None, :] + spread * rng.uniform(-1, 1, (clusters, per, space.dim))
    return PointCloud(P.reshape(-1, space.dim), space, label)


def modes_for(space: SpaceModel):
    return mt.MODES if space.locally_convex else ("standard",)


# --- metric ---------------------------------------------------------------------

def metric_checks(cfg: RunConfig) -> list[Check]:
    out = []
    rng = np.random.default_rng(cfg.seed)
    for space in cfg.spaces:
        name = slug(space)
        if not space.locally_convex:
            try:
                mt.build_fnorm(space, "gauge")
                rejected = False
            except mt.NotLocallyConvex:
                rejected = True
            out.append(Check(f"metric/rejects-gauge/{name}", "frechet-metric-construction",
                             None, None, "pass" if rejected else "fail"))
        for mode in modes_for(space):
            metric = mt.build_fnorm(space, mode, depth=cfg.depth)
            quads = mt.sample_pairs(space, cfg.samples, rng, k=4, scale=0.6)
            rep = mt.audit_additive(metric, quads)
            out.append(Check.assert_le(f"metric/additive/{name}/{mode}", "additive-inequality",
                                       rep.max_margin, 1e-12, samples=rep.samples))
            axioms = mt.audit_axioms(metric, mt.sample_pairs(space, cfg.samples, rng, k=3, scale=0.6))
            for key, r in axioms.items():
                out.append(Check.assert_le(f"metric/{key}/{name}/{mode}", "frechet-metric-construction",
                                           r.max_margin, r.tolerance, samples=r.samples))
            out.extend(_scaling_checks(metric, name, cfg, rng))
        if space.locally_convex:
            out.extend(_paper_construction_checks(space, name, cfg, rng))
    return out


def _scaling_checks(metric: mt.FNormMetric, name: str, cfg: RunConfig, rng) -> list[Check]:
    space, mode = metric.space, metric.mode
    pairs = mt.sample_pairs(space, cfg.samples, rng, scale=0.6)
    if mode == "gauge":
        rep = mt.audit_scaling(metric, pairs, rng.uniform(0, 1, 16))
        return [Check.assert_le(f"metric/scaling/{name}/gauge", "scaling-inequality",
                                rep.max_margin, 1e-12, samples=rep.samples)]
    if mode == "standard":
        rep = mt.audit_scaling(metric, pairs, rng.uniform(0, 1, 16))
        return [Check(f"metric/scaling/{name}/standard", "scaling-inequality", rep.max_margin, None,
                      "info", {"note": "baseline metric; positive margins are expected"})]
    lams = 2.0 ** -np.arange(0, 5)
    inside = _pairs_within(metric, pairs, metric.valid_radius)
    rep = mt.audit_scaling(metric, inside, lams)
    far = 3.0 * pairs
    rep_far = mt.audit_scaling(metric, far, lams)
    return [
        Check.assert_le(f"metric/scaling/{name}/paper", "scaling-inequality", rep.max_margin,
                        2.0 ** -metric.depth, samples=rep.samples),
        Check(f"metric/scaling-capped/{name}/paper", "scaling-inequality",
              rep_far.regions["capped"]["max_margin"], None, "info",
              {"regions": rep_far.regions, "cap_value": metric.cap_value}),
    ]


def _pairs_within(metric: mt.FNormMetric, pairs: np.ndarray, radius: float) -> np.ndarray:
    """Shrink each pair so its gauge distance is at most ``radius``."""
    g = metric.gauge(pairs[:, 1] - pairs[:, 0]) * 2.0 ** -metric.n0
    s = np.minimum(1.0, radius / np.maximum(g, 1e-300))
    return pairs * s[:, None, None]


def _paper_construction_checks(space: SpaceModel, name: str, cfg: RunConfig, rng) -> list[Check]:
    out = []
    for depth in (cfg.depth, 16):
        metric = mt.build_fnorm(space, "paper", depth=depth)
        gauge = mt.build_fnorm(space, "gauge")
        X = rng.uniform(-1, 1, (100, space.dim))
        X = _pairs_within(metric, np.stack([np.zeros_like(X), X], 1), metric.valid_radius)[:, 1]
        val = metric.fnorm(X)
        g = gauge.fnorm(X)
        sandwich = max(float(np.max(g - val)), float(np.max(val - g - 2.0 ** -depth)))
        out.append(Check.assert_le(f"metric/paper-sandwich/{name}/depth{depth}",
                                   "frechet-metric-construction", sandwich, 0.0))
        exhaustive = np.array([mt.paper_fnorm_exhaustive(metric, x) for x in X])
        bnb = np.array([_bnb_value(metric, float(t)) for t in g])
        dis = float(max(np.max(np.abs(exhaustive - val)), np.max(np.abs(bnb - val))))
        out.append(Check.assert_le(f"metric/paper-exhaustive/{name}/depth{depth}",
                                   "frechet-metric-construction", dis, 0.0))
    metric = mt.build_fnorm(space, "paper", depth=6)
    disagree = 0
    for _ in range(20):
        H = sorted(rng.choice(np.arange(1, 7), size=rng.integers(1, 4), replace=False).tolist())
        x = rng.uniform(-1, 1, space.dim) * rng.uniform(0.1, 1.2)
        pH = sum(2.0 ** -n for n in H)
        if abs(float(metric.gauge(x)) - pH) < 1e-7:
            continue
        disagree += mt.member_VH_shortcut(metric, H, x) != mt.member_VH_decomposition(metric, H, x)
    out.append(Check.assert_le(f"metric/member-VH-routes/{name}", "frechet-metric-construction",
                               disagree, 0))
    return out


def _bnb_value(metric: mt.FNormMetric, g: float) -> float:
    hit = mt.least_dyadic_cover(g * 2.0 ** -metric.n0, metric.depth)
    return metric.cap_value if hit is None else hit[0]


def counterexample_checks(cfg: RunConfig) -> list[Check]:
    out = []
    y = np.array([1.0, 0.0, 0.0, 0.0])
    x = np.zeros(4)
    for p in (0.25, 0.5, 0.75):
        for lam in (0.1, 0.25, 0.5, 0.9):
            lhs, rhs, violated = mt.lp_counterexample(p, lam, x, y)
            d = 1.0
            out.append(Check.assert_le(f"counterexample/exact/p{p}/l{lam}", "lp-counterexample",
                                       abs(lhs - lam ** p * d), 1e-12, lhs=lhs, rhs=rhs))
            out.append(Check(f"counterexample/violated/p{p}/l{lam}", "lp-counterexample",
                             rhs - lhs, 0.0, "pass" if violated and lam ** p - lam > 0 else "fail",
                             {"lhs": lhs, "rhs": rhs, "violated": violated}))
    for lam in (0.1, 0.5, 0.9):
        lhs, rhs, violated = mt.lp_counterexample(1.0, lam, x, y)
        out.append(Check(f"counterexample/boundary-p1/l{lam}", "lp-counterexample", abs(lhs - rhs), 1e-12,
                         "pass" if abs(lhs - rhs) <= 1e-12 and not violated else "fail"))
    lhs, rhs, violated = mt.lp_counterexample(0.5, 0.25, x, y)
    out.append(Check(f"counterexample/headline", "lp-counterexample", None, None, "info",
                     {"p": 0.5, "lambda": 0.25, "lhs": lhs, "rhs": rhs, "violated": violated}))
    return out


# --- convexity ------------------------------------------------------------------

def convexity_checks(cfg: RunConfig) -> list[Check]:
    out = []
    rng = np.random.default_rng(cfg.seed + 1)
    n = cfg.samples
    for space in cfg.spaces:
        if not space.locally_convex:
            continue
        name = slug(space)
        metric = mt.build_fnorm(space, "gauge")
        U = rng.uniform(-1, 1, (n, 4, space.dim))
        t = rng.uniform(0, 1, n)
        r = cx.check_tcs(metric, U[:, 0], U[:, 1], U[:, 2], t)
        out.append(Check.assert_le(f"convexity/tcs/{name}", "convex-structures", r.max(), 1e-9))
        w = rng.dirichlet(np.ones(3), n)
        r = cx.check_tmcs(metric, U[:, 0], U[:, 1], U[:, 2], U[:, 3], w)
        out.append(Check.assert_le(f"convexity/tmcs/{name}", "convex-structures", r.max(), 1e-9))
        P = cx.check_property_P(metric, U, t)
        out.append(Check.assert_le(f"convexity/P-conventional/{name}", "convex-structures",
                                   P["conventional"].max_violation, 1e-9))
        out.append(Check(f"convexity/P-printed/{name}", "convex-structures",
                         P["printed"].max_violation, None, "info",
                         {"note": "printed index pairing; recorded, not asserted"}))
    space = make_space("c-grid", 2, 1)
    metric = mt.build_fnorm(space, "gauge")
    seg = PointCloud([[0.0, 0.0], [1.0, 0.0]], space, "segment")
    tri = PointCloud([[0.0, 0.0], [1.0, 0.2], [0.3, 0.9]], space, "triangle")
    for C in (seg, tri):
        grid = cx.hull_sample(C, 8)
        for rr in (0.05, 0.1, 0.5):
            rep = cx.check_stability(metric, grid, rr, cfg.stability_samples, 1e-9,
                                     seed=cfg.seed, generators=C)
            out.append(Check.assert_le(f"convexity/stability/{C.label}/r{rr}", "convex-structures",
                                       rep.max_violation, 1e-9, samples=rep.samples))
    for C in (PointCloud([[0.5, 0.5]], space, "singleton"), seg, tri):
        rep = cx.check_property_Q(metric, C, [0.5, 0.25])
        out.append(Check.assert_le(f"convexity/Q/{C.label}", "convex-structures", rep.max_violation,
                                   0.0, net_sizes=rep.params["net_sizes"]))
    return out


# --- MNC -----------------------------------------------------------------------------

def default_grid(top: float = 8.0, bottom: float = 1e-3) -> tuple[float, ...]:
    return mnc.geometric_grid(top, bottom, 8)


def prop_spaces():
    return [make_space("c-grid", 3, 1), make_space("c-grid", 4, 2), make_space("seq-product", 4, 2)]


def mnc_checks(cfg: RunConfig) -> list[Check]:
    out = []
    rng = np.random.default_rng(cfg.seed + 2)
    grid = default_grid()
    # certificates and packing/covering duality
    dual_gap, unsound = -math.inf, 0
    for i in range(cfg.cloud_count):
        space = prop_spaces()[i % 3]
        metric = mt.build_fnorm(space, "gauge")
        M = cluster_cloud(space, rng, int(rng.integers(2, 6)), int(rng.integers(2, 8)), 0.1)
        eps = float(rng.uniform(0.05, 1.5))
        net = mnc.greedy_net(metric, M, eps)
        unsound += not (net.complete and net.verify(metric, M))
        cnt, W = mnc.packing_lower(metric, M, eps)
        unsound += not mnc.is_separated(metric, W, 2 * eps)
        dual_gap = max(dual_gap, cnt - len(net))
        b = mnc.alpha_bounds(metric, M, grid, cfg.max_centers)
        unsound += not (b.lower <= b.upper and b.net.verify(metric, M))
    out.append(Check.assert_le("mnc/certificates-verify", "hausdorff-mnc-definition", unsound, 0))
    out.append(Check.assert_le("mnc/packing-vs-net-size", "hausdorff-mnc-definition", dual_gap, 0))
    # proposition items on seeded pairs
    worst: dict[str, float] = {}
    tols: dict[str, float] = {}
    for i in range(cfg.cloud_count):
        space = prop_spaces()[i % 3]
        metric = mt.build_fnorm(space, "gauge")
        M = cluster_cloud(space, rng, int(rng.integers(3, 6)), int(rng.integers(2, 6)), 0.1, label="M")
        N = cluster_cloud(space, rng, int(rng.integers(3, 6)), int(rng.integers(2, 6)), 0.1, label="N")
        for chk in mnc.check_mnc_properties(metric, [M, N], grid, cfg.max_centers, seed=cfg.seed + i):
            key = f"{chk.item}: {chk.relation}"
            worst[key] = max(worst.get(key, -math.inf), chk.margin - chk.tolerance)
            tols[key] = chk.tolerance
    for key in sorted(worst):
        out.append(Check.assert_le(f"mnc/item-{key}", "mnc-properties", worst[key], 0.0))
    out.extend(ball_checks())
    out.extend(family_checks())
    return out


def ball_checks() -> list[Check]:
    out = []
    space = make_space("c-grid", 2, 2)
    metric = mt.build_fnorm(space, "gauge")
    B = mnc.ball_grid(metric, np.zeros(2), 1.0, 1 / 16)
    prev = math.inf
    worst = -math.inf
    for bottom in (0.5, 0.25, 0.125, 0.0625):
        grid = default_grid(2.0, bottom)
        up = mnc.alpha_bounds(metric, B, grid, None).upper
        worst = max(worst, up - min(grid), up - prev)
        prev = up
    out.append(Check.assert_le("mnc/ball-truncation-zero", "mnc-properties", worst, 0.0))
    trend = mnc.ball_covering_trend(lambda d: mt.build_fnorm(make_space("c-grid", d, 1), "gauge"),
                                    [1, 2, 3, 4], 0.5, 0.25)
    out.append(Check("mnc/ball-covering-trend", "mnc-properties", None, None, "info", {"trend": trend}))
    return out


def shipped_families(metric: mt.FNormMetric) -> list[mnc.DecreasingFamily]:
    space = metric.space
    h = 1 / 60
    balls = [mnc.ball_grid(metric, np.zeros(2), 1 / n, h) for n in range(1, 7)]
    segs = [PointCloud(np.c_[np.arange(0, 60 // n + 1) * h, np.zeros(60 // n + 1)], space, f"seg{n}")
            for n in range(1, 7)]
    c = np.array([0.3, -0.2])
    boxes = []
    for n in range(1, 7):
        k = np.arange(0, 60 // n + 1) * h
        I, J = np.meshgrid(k, k, indexing="ij")
        boxes.append(PointCloud(c + np.c_[I.ravel(), J.ravel()], space, f"box{n}"))
    return [mnc.DecreasingFamily(balls, label="balls"), mnc.DecreasingFamily(segs, label="segments"),
            mnc.DecreasingFamily(boxes, label="corner-boxes")]


def family_checks(eps: float = 1e-3) -> list[Check]:
    space = make_space("c-grid", 2, 2)
    metric = mt.build_fnorm(space, "gauge")
    out = []
    for fam in shipped_families(metric):
        res = mnc.nested_intersection_probe(metric, fam, eps, default_grid(2.0, 0.01))
        out.append(Check(f"mnc/nested-intersection/{fam.label}", "mnc-properties", res.max_distance, eps,
                         "pass" if res.found else "fail", {"point": res.to_dict()["point"],
                                                           "uppers": res.uppers}))
    return out


# --- hull invariance ----------------------------------------------------------------

def hull_clouds(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed + 3)
    for i in range(cfg.cloud_count):
        dim = int(rng.integers(1, 7))
        space = make_space("c-grid", dim, 1) if i % 2 == 0 else make_space("seq-product", dim, 1)
        n = int(rng.integers(4, 13)) if i % 5 == 0 else int(rng.integers(13, 41))
        yield i, PointCloud(rng.uniform(-1, 1, (n, dim)), space, f"cloud{i}")


def transfer_one(metric: mt.FNormMetric, M: PointCloud, eps: float, max_centers: int, resolution: int):
    """Bounds and net transfer for one cloud; returns a dict of the quantities compared."""
    grid = default_grid(8.0, 1e-3)
    bM = mnc.alpha_bounds(metric, M, grid, max_centers)
    r = resolution
    while cx.hull_grid_size(len(M), r) > 20_000 and r > 1:
        r -= 1
    res = mnc.net_transfer_co(metric, M, bM.net, eps, r)
    T = cx.hull_sample(M, r)
    K2 = len(res.net.centers)
    b_co = mnc.alpha_bounds(metric, T, grid, max_centers, known_packings=[bM.packing])
    return {"upper_M": bM.upper, "lower_M": bM.lower, "co_radius": res.net.radius,
            "co_bound": res.eta + eps, "grid_gap": res.grid_gap, "hinge": res.hinge_margin,
            "complete": res.net.complete and res.net.verify(metric, T), "lower_co": b_co.lower,
            "net_size_co": K2, "resolution": r, "net_M": bM.net}


def hull_checks(cfg: RunConfig) -> list[Check]:
    worst_up, worst_low, worst_hinge, incomplete, brute_bad = -math.inf, -math.inf, -math.inf, 0, 0
    for i, M in hull_clouds(cfg):
        metric = mt.build_fnorm(M.space, "gauge")
        q = transfer_one(metric, M, cfg.eps, cfg.max_centers, cfg.resolution)
        worst_up = max(worst_up, q["co_radius"] - (q["upper_M"] + cfg.eps))
        worst_low = max(worst_low, q["lower_M"] - q["lower_co"])
        worst_hinge = max(worst_hinge, q["hinge"])
        incomplete += not q["complete"]
        if len(M) <= 12:
            brute_bad += not brute_force_directions(metric, M, q["upper_M"], q["lower_M"], cfg.max_centers,
                                                    q["net_M"])
    return [
        Check.assert_le("hull/upper-co-le-upper-M-plus-eps", "hull-invariance", worst_up, 1e-12),
        Check.assert_le("hull/lower-M-le-lower-co", "hull-invariance", worst_low, 0.0),
        Check.assert_le("hull/hinge-d(x,z)-le-eta", "hull-invariance", worst_hinge, 1e-12),
        Check.assert_le("hull/certificates-complete", "hull-invariance", incomplete, 0),
        Check.assert_le("hull/brute-force-directions", "hull-invariance", brute_bad, 0),
    ]


def brute_force_directions(metric, M: PointCloud, upper: float, lower: float, K: int, net) -> bool:
    """On small clouds, exact minimum net sizes agree with the direction of each bound."""
    ok = True
    if lower > 0:
        # a (K+1)-packing at separation > 2 lower forbids K centres at radius lower
        ok &= mnc.brute_force_min_net(metric, M, lower) > K
    # the certified net has at most K centres at radius `upper`, so the exact minimum over
    # the same candidates cannot exceed its size
    cands = np.vstack([M.points, net.centers])
    if len(cands) <= 20:
        ok &= mnc.brute_force_min_net(metric, M, upper, cands) <= len(net.centers) <= K
    for eps in (lower, upper):
        if eps > 0:
            cnt, _ = mnc.packing_lower(metric, M, eps)
            ok &= cnt <= mnc.brute_force_min_net(metric, M, eps) <= len(mnc.greedy_net(metric, M, eps))
    return bool(ok)


# --- fixed points ---------------------------------------------------------------------

def darbo_problem(seed: int = 0):
    space = make_space("c-grid", 16, 4, {"step": 0.25})
    rng = np.random.default_rng(seed)
    op = OperatorSpec("contraction-plus-smoothing", space, 0.5, rng.uniform(-1, 1, 16), kernel_width=0.5)
    M0 = cross_polytope(space, np.zeros(16), invariant_radius(op))
    return op, M0


def fixedpoint_checks(cfg: RunConfig) -> list[Check]:
    out = []
    op, M0 = darbo_problem(cfg.seed)
    metric = mt.build_fnorm(op.space, "gauge")
    trace = darbo_solve(op, M0, cfg.tol, cfg.max_iter, resolution=2, metric=metric)
    emitted = trace.emit(op, metric)
    a = trace.alphas()
    decay = float(np.max(a[1:] - 0.55 * a[:-1])) if len(a) > 1 else -math.inf
    oracle = plain_iteration(op, np.zeros(16), 1000)
    out.append(Check.assert_le("fixedpoint/darbo-residual", "fixed-point-theorems", emitted["residual"],
                               cfg.tol, iterations=len(trace.iterations) - 1))
    out.append(Check.assert_le("fixedpoint/darbo-iterations", "fixed-point-theorems",
                               len(trace.iterations) - 1, cfg.max_iter))
    out.append(Check.assert_le("fixedpoint/darbo-alpha-decay", "fixed-point-theorems", decay, 0.0,
                               alphas=a.tolist()))
    out.append(Check.assert_le("fixedpoint/darbo-vs-oracle", "fixed-point-theorems",
                               float(metric(trace.x_star, oracle)), 1e-5))
    defects = [r["nesting_defect"] - r["thinning_gap"] for r in trace.iterations[1:]]
    out.append(Check.assert_le("fixedpoint/darbo-nesting", "fixed-point-theorems",
                               max(defects, default=-math.inf), 1e-9))
    space = make_space("c-grid", 3, 1)
    rng = np.random.default_rng(cfg.seed + 4)
    trials = [cluster_cloud(space, rng, cfg.max_centers + 1, 6, 0.02) for _ in range(5)]
    grid = default_grid(8.0, 1e-3)
    half = OperatorSpec("affine-contraction", space, 0.5)
    est = estimate_upper_char(half, trials, grid, cfg.max_centers)
    out.append(Check.assert_le("fixedpoint/upper-char-half", "fixed-point-theorems",
                               abs(est.gamma - 0.5), est.slack, gamma=est.gamma))
    expected = {"half": (half, "condensing"),
                "identity": (OperatorSpec("custom-table", space), "not condensing"),
                "translation": (OperatorSpec("custom-table", space, shift=np.array([0.7, -0.3, 1.1])),
                                "not condensing")}
    for key, (op_, want) in expected.items():
        got = sadovskii_check(op_, trials, grid, cfg.max_centers).verdict
        out.append(Check(f"fixedpoint/sadovskii-{key}", "fixed-point-theorems", None, None,
                         "pass" if got == want else "fail", {"verdict": got, "expected": want}))
    return out


SUITE_FUNCS = {
    "metric": metric_checks,
    "counterexample": counterexample_checks,
    "convexity": convexity_checks,
    "mnc": mnc_checks,
    "hull-invariance": hull_checks,
    "fixedpoint": fixedpoint_checks,
}


def run_checks(name: str, cfg: RunConfig) -> list[Check]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    names = list(SUITE_FUNCS) if name == "all" else [name]
    out = []
    for n in names:
        out.extend(SUITE_FUNCS[n](cfg))
    return out
