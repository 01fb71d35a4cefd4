"""Acceptance criteria, each at its stated tolerance and runtime limit.

Every test records one ``criterion N: PASS|FAIL ...`` line; the lines are
printed together at the end of the pytest run.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from fmnc import convexity as cx
from fmnc import metric as mt
from fmnc import mnc
from fmnc.fixedpoint import (OperatorSpec, darbo_solve, estimate_upper_char, plain_iteration,
                             sadovskii_check)
from fmnc.space import PointCloud, make_space, shipped_spaces
from fmnc.suites import (RunConfig, ball_checks, brute_force_directions, darbo_problem, family_checks,
                         hull_clouds, transfer_one)

SEED = 42
N_MAX = 8


@pytest.fixture
def verdict(record_property):
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        record_property("criterion", line)
        assert ok, line
    return record


def metrics_for(space, modes=mt.MODES):
    for mode in modes:
        if mode == "standard" or space.locally_convex:
            yield mode, mt.build_fnorm(space, mode, depth=N_MAX)


def test_1_additive_inequality(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst, runs = -math.inf, 0
    for space in shipped_spaces():
        assert space.dim <= 32
        Q = mt.sample_pairs(space, 1000, rng, k=4)
        for mode, d in metrics_for(space):
            worst = max(worst, mt.audit_additive(d, Q).max_margin)
            runs += 1
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-12 and dt < 5, f"max margin {worst:.3g} over {runs} space/mode pairs, {dt:.2f}s")


def test_2_scaling_inequality(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 1)
    gauge_worst, paper_worst, capped = -math.inf, -math.inf, []
    lam_dyadic = 2.0 ** -np.arange(5)
    for space in shipped_spaces():
        if not space.locally_convex:
            continue
        g = mt.build_fnorm(space, "gauge")
        pairs = mt.sample_pairs(space, 1000, rng)
        lams = rng.uniform(0, 1, 1000)
        x, y = pairs[:, 0], pairs[:, 1]
        m = g(lams[:, None] * x, lams[:, None] * y) - lams * g(x, y)
        gauge_worst = max(gauge_worst, float(m.max()))
        p = mt.build_fnorm(space, "paper", depth=N_MAX)
        rep = mt.audit_scaling(p, mt.sample_pairs(space, 1000, rng, scale=0.6), lam_dyadic)
        paper_worst = max(paper_worst, rep.regions["inside"]["max_margin"])
        capped.append(rep.regions["capped"]["max_margin"])
    dt = time.perf_counter() - t0
    ok = gauge_worst <= 1e-12 and paper_worst <= 2.0 ** -N_MAX and dt < 10
    verdict(2, ok, f"gauge {gauge_worst:.3g}, paper inside {paper_worst:.3g} <= {2.0 ** -N_MAX}, "
                   f"capped (reported) {max(c for c in capped if c is not None):.3g}, {dt:.2f}s")


def test_3_pseudonorm_sandwich(verdict):
    rng = np.random.default_rng(SEED + 2)
    bad_sandwich, mismatches, checked = 0, 0, 0
    for space in shipped_spaces():
        if not space.locally_convex:
            continue
        p = mt.build_fnorm(space, "paper", depth=N_MAX)
        X = rng.uniform(-1, 1, (1000, space.dim)) * rng.uniform(0, 1.2, (1000, 1))
        g = p.gauge(X)
        inside = g <= p.valid_radius
        v = p.fnorm(X)
        bad_sandwich += int(np.sum(~((g[inside] <= v[inside]) & (v[inside] <= g[inside] + 2.0 ** -N_MAX))))
    for depth in (4, 8, 12, 16):
        space = make_space("c-grid", 8, 4, {"step": 0.25})
        p = mt.build_fnorm(space, "paper", depth=depth)
        X = rng.uniform(-1, 1, (100, 8)) * rng.uniform(0, 1.1, (100, 1))
        for x, v in zip(X, p.fnorm(X)):
            mismatches += float(v) != mt.paper_fnorm_exhaustive(p, x)
            checked += 1
    verdict(3, bad_sandwich == 0 and mismatches == 0,
            f"sandwich violations {bad_sandwich}, exhaustive mismatches {mismatches}/{checked}")


def test_4_lp_counterexample(verdict):
    rng = np.random.default_rng(SEED + 3)
    step = 0.25
    worst_exact, min_gap = 0.0, math.inf
    for p in (0.25, 0.5, 0.75):
        for lam in (0.1, 0.25, 0.5, 0.9):
            x, y = rng.uniform(-2, 2, (2, 16))
            lhs, rhs, bad = mt.lp_counterexample(p, lam, x, y, step)
            d = np.sum(np.abs(y - x) ** p) * step
            worst_exact = max(worst_exact, abs(lhs - lam ** p * d))
            min_gap = min(min_gap, (lam ** p - lam) if bad else -1.0)
    lhs, rhs, bad = mt.lp_counterexample(1.0, 0.5, np.zeros(4), np.ones(4), step)
    boundary = abs(lhs - rhs) <= 1e-12 and not bad
    ok = worst_exact <= 1e-12 and min_gap > 0 and boundary
    verdict(4, ok, f"exactness {worst_exact:.3g}, min lam^p - lam {min_gap:.3g}, p=1 equality {boundary}")


def test_5_convex_structure_checks(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    space = make_space("c-grid", 8, 4, {"step": 0.25})
    d = mt.build_fnorm(space, "gauge")
    U = rng.uniform(-1, 1, (1000, 4, 8))
    t = rng.uniform(0, 1, 1000)
    res = {
        "tcs": float(cx.check_tcs(d, U[:, 0], U[:, 1], U[:, 2], t).max()),
        "tmcs": float(cx.check_tmcs(d, U[:, 0], U[:, 1], U[:, 2], U[:, 3], rng.dirichlet(np.ones(3), 1000)).max()),
        "P": cx.check_property_P(d, U, t)["conventional"].max_violation,
    }
    gens = PointCloud(rng.uniform(-1, 1, (4, 8)), space, "C")
    C = cx.hull_sample(gens, 3)
    for r in (0.05, 0.1, 0.5):
        res[f"stab{r}"] = cx.check_stability(d, C, r, 1000, seed=SEED, generators=gens).max_violation
    ok = all(v <= 1e-9 for v in res.values())
    verdict(5, ok, ", ".join(f"{k} {v:.3g}" for k, v in res.items()) + f", {time.perf_counter() - t0:.1f}s")


def test_6_hull_invariance_bounds(verdict):
    t0 = time.perf_counter()
    cfg = RunConfig(seed=SEED)
    eps = 0.1
    up, low, brute, count = -math.inf, -math.inf, 0, 0
    for _, M in hull_clouds(cfg):
        assert len(M) <= 40 and M.space.dim <= 6
        metric = mt.build_fnorm(M.space, "gauge")
        q = transfer_one(metric, M, eps, cfg.max_centers, cfg.resolution)
        assert q["complete"]
        up = max(up, q["co_radius"] - (q["upper_M"] + eps + q["grid_gap"]))
        low = max(low, q["lower_M"] - q["lower_co"])
        if len(M) <= 12:
            brute += not brute_force_directions(metric, M, q["upper_M"], q["lower_M"], cfg.max_centers, q["net_M"])
        count += 1
    dt = time.perf_counter() - t0
    ok = count == 50 and up <= 1e-12 and low <= 0 and brute == 0 and dt < 60
    verdict(6, ok, f"{count} clouds, upper margin {up:.3g}, lower margin {low:.3g}, "
                   f"brute-force disagreements {brute}, {dt:.1f}s")


def test_7_proposition_items(verdict):
    from fmnc.suites import cluster_cloud, default_grid, prop_spaces

    rng = np.random.default_rng(SEED + 2)
    grid = default_grid()
    worst: dict[str, float] = {}
    for i in range(50):
        space = prop_spaces()[i % 3]
        metric = mt.build_fnorm(space, "gauge")
        M = cluster_cloud(space, rng, int(rng.integers(3, 6)), int(rng.integers(2, 6)), 0.1, label="M")
        N = cluster_cloud(space, rng, int(rng.integers(3, 6)), int(rng.integers(2, 6)), 0.1, label="N")
        for chk in mnc.check_mnc_properties(metric, [M, N], grid, 3, seed=SEED + i):
            worst[chk.item] = max(worst.get(chk.item, -math.inf), chk.margin - chk.tolerance)
    items_ok = set(worst) >= {"i", "iii", "iv", "v", "vi", "vii"} and all(v <= 0 for v in worst.values())
    ball = [c for c in ball_checks() if c.verdict != "info"]
    fams = family_checks(1e-3)
    ok = items_ok and all(c.verdict == "pass" for c in ball + fams) and len(fams) == 3
    verdict(7, ok, "items " + ", ".join(f"{k} {v:.3g}" for k, v in sorted(worst.items()))
            + f"; ball truncation {ball[0].margin:.3g}; nested probes "
            + ", ".join(f"{c.id.rsplit('/', 1)[1]} {c.margin:.2g}" for c in fams))


def test_8_darbo_solver(verdict):
    t0 = time.perf_counter()
    op, M0 = darbo_problem(SEED)
    assert op.lam == 0.5 and op.space.dim == 16 and op.space.kind == "c-grid"
    metric = mt.build_fnorm(op.space, "gauge")
    tr = darbo_solve(op, M0, 1e-6, 60, resolution=2, metric=metric)
    a = tr.alphas()
    gaps = np.array([row.get("thinning_gap", 0.0) for row in tr.iterations])
    decay = float(np.max(a[1:] - (0.55 * a[:-1] + gaps[1:]))) if len(a) > 1 else -math.inf
    oracle = plain_iteration(op, np.zeros(16), 1000)
    err = float(metric(tr.x_star, oracle))
    dt = time.perf_counter() - t0
    ok = tr.residual < 1e-6 and len(tr.iterations) - 1 <= 60 and decay <= 0 and err < 1e-5 and dt < 30
    verdict(8, ok, f"residual {tr.residual:.3g} after {len(tr.iterations) - 1} iterations, "
                   f"decay margin {decay:.3g}, oracle distance {err:.3g}, {dt:.1f}s")


def test_9_condensing(verdict):
    space = make_space("c-grid", 3, 1)
    rng = np.random.default_rng(SEED + 5)
    grid = mnc.geometric_grid(8.0, 1e-3)
    trials = [PointCloud(rng.uniform(-1, 1, (30, 3)) * s + rng.uniform(-2, 2, 3), space) for s in (0.5, 1, 2)]
    g = np.arange(-4, 5) / 4
    lattice = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
    lattices = [PointCloud(s * lattice + c, space) for s, c in ((1, 0), (2, 1), (0.5, -3))]
    half = OperatorSpec("affine-contraction", space, 0.5)
    est = estimate_upper_char(half, lattices, grid)
    in_band = 0.5 - est.slack <= est.gamma <= 0.5 + est.slack
    v_half = sadovskii_check(half, trials, grid).verdict
    v_id = sadovskii_check(OperatorSpec("custom-table", space), trials, grid).verdict
    shift = OperatorSpec("affine-contraction", space, 1.0, np.array([1.5, -0.5, 3.0]))
    v_shift = sadovskii_check(shift, trials, grid).verdict
    ok = in_band and (v_half, v_id, v_shift) == ("condensing", "not condensing", "not condensing")
    verdict(9, ok, f"gamma {est.gamma:.4f} with slack {est.slack:.4f}; verdicts {v_half} / {v_id} / {v_shift}")


def test_10_determinism(verdict, tmp_path):
    outs, times = [], []
    for k in range(2):
        path = tmp_path / f"all{k}.json"
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "fmnc.cli", "suite", "all", "--seed", "42", "--out", str(path)],
                              capture_output=True, text=True)
        times.append(time.perf_counter() - t0)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    same = outs[0] == outs[1]
    verdict(10, same and max(times) < 180,
            f"byte-identical {same} ({len(outs[0])} bytes), runtimes {times[0]:.1f}s / {times[1]:.1f}s")
