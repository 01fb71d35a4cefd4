"""Property-based checks of the algebraic invariants."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fmnc import metric as mt
from fmnc.convexity import check_tcs, hull_sample
from fmnc.mnc import alpha_bounds, geometric_grid, greedy_net, is_separated, packing_lower
from fmnc.space import PointCloud, make_space, shipped_spaces

SPACES = shipped_spaces()
finite = st.floats(-100, 100, allow_nan=False, allow_subnormal=False)


def vectors(dim, n=1):
    return arrays(np.float64, (n, dim), elements=finite)


@st.composite
def space_and_points(draw, n=2):
    sp = draw(st.sampled_from(SPACES))
    return sp, draw(vectors(sp.dim, n))


@given(space_and_points(), st.floats(-10, 10, allow_nan=False))
def test_seminorm_homogeneous(data, lam):
    sp, X = data
    s = sp.seminorms(X[0])
    if sp.locally_convex:
        np.testing.assert_allclose(sp.seminorms(lam * X[0]), abs(lam) * s, rtol=1e-12, atol=1e-9)


@given(space_and_points())
def test_seminorm_subadditive(data):
    sp, X = data
    lhs = sp.seminorms(X[0] + X[1])
    rhs = sp.seminorms(X[0]) + sp.seminorms(X[1])
    assert np.all(lhs <= rhs * (1 + 1e-12) + 1e-9)


@given(vectors(32))
def test_c_grid_monotone_in_k(X):
    sp = make_space("c-grid", 32, 8, {"step": 0.125})
    assert np.all(np.diff(sp.seminorms(X[0])) >= 0)


@given(st.floats(0.05, 0.95), st.floats(0.01, 0.99), arrays(np.float64, 4, elements=st.floats(0.1, 10)))
def test_lp_scaling_anomaly(p, lam, y):
    lhs, rhs, bad = mt.lp_counterexample(p, lam, np.zeros(4), y)
    np.testing.assert_allclose(lhs, lam ** p * np.sum(np.abs(y) ** p), rtol=1e-12)
    assert bad


@settings(max_examples=60)
@given(space_and_points(n=3), st.sampled_from(mt.MODES))
def test_metric_axioms(data, mode):
    sp, X = data
    if mode != "standard" and not sp.locally_convex:
        return
    d = mt.build_fnorm(sp, mode)
    x, y, z = X
    assert float(d(x, x)) == 0.0
    assert float(d(x, y)) == float(d(y, x))
    assert float(d(x, z)) <= float(d(x, y)) + float(d(y, z)) + 1e-12
    assert abs(float(d(x + z, y + z)) - float(d(x, y))) <= 1e-12


@given(st.floats(0, 2, allow_nan=False), st.integers(1, 16))
def test_paper_quantize_sandwich(g, depth):
    v = float(mt.paper_quantize(g, depth, 1.0))
    if g <= 1 - 2.0 ** -depth:
        assert g <= v <= g + 2.0 ** -depth
    else:
        assert v == 1.0


@settings(max_examples=40)
@given(vectors(2, 3), st.floats(0, 1))
def test_tcs_property(X, t):
    d = mt.build_fnorm(make_space("c-grid", 2, 1), "gauge")
    assert float(check_tcs(d, X[0], X[1], X[2], t)) <= 1e-9 * (1 + np.abs(X).max())


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25).flatmap(lambda n: arrays(np.float64, (n, 2), elements=st.floats(-5, 5))),
       st.floats(0.05, 3))
def test_nets_and_packings(P, eps):
    sp = make_space("c-grid", 2, 1)
    d = mt.build_fnorm(sp, "gauge")
    M = PointCloud(P, sp)
    net = greedy_net(d, M, eps)
    assert net.complete and net.verify(d, M)
    n, W = packing_lower(d, M, eps)
    assert is_separated(d, W, 2 * eps)
    # each eps-ball holds at most one point of a 2 eps-separated set
    assert n <= len(net.centers)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (12, 2), elements=st.floats(-5, 5)), st.integers(1, 4))
def test_alpha_bracket(P, K):
    sp = make_space("c-grid", 2, 1)
    d = mt.build_fnorm(sp, "gauge")
    b = alpha_bounds(d, PointCloud(P, sp), geometric_grid(16.0, 0.01), K)
    assert b.lower <= b.upper
    if b.net is not None:
        assert len(b.net.centers) <= K and b.net.verify(d, P)


@settings(max_examples=30)
@given(st.integers(1, 4).flatmap(lambda n: arrays(np.float64, (n, 3), elements=st.floats(-5, 5))),
       st.integers(1, 4))
def test_hull_grid_inside_box(P, r):
    H = hull_sample(PointCloud(P, make_space("c-grid", 3, 1)), r).points
    assert np.all(H >= P.min(axis=0) - 1e-12) and np.all(H <= P.max(axis=0) + 1e-12)
