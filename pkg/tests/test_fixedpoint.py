import numpy as np
import pytest

from fmnc import fixedpoint as fp
from fmnc.metric import build_fnorm
from fmnc.mnc import geometric_grid
from fmnc.space import PointCloud, make_space

GRID = geometric_grid(8.0, 1e-3)


@pytest.fixture
def r3():
    return make_space("c-grid", 3, 1)


def test_affine_image(line):
    op = fp.OperatorSpec("affine-contraction", line, 0.5)
    M = PointCloud(np.array([[2.0]]), line)
    np.testing.assert_array_equal(fp.apply_operator(op, M).points, [[1.0]])


def test_custom_identity(r3, rng):
    op = fp.OperatorSpec("custom-table", r3)
    M = PointCloud(rng.normal(size=(5, 3)), r3)
    np.testing.assert_array_equal(fp.apply_operator(op, M).points, M.points)


def test_smoothing_images_pointwise(rng):
    sp = make_space("c-grid", 16, 4, {"step": 0.25})
    op = fp.OperatorSpec("contraction-plus-smoothing", sp, 0.5, rng.normal(size=16))
    M = PointCloud(rng.normal(size=(10, 16)), sp)
    G = fp.smoothing_kernel(sp, 0.5, 3, 0.04)
    want = np.array([0.5 * x + G @ np.tanh(x) + op.shift for x in M.points])
    np.testing.assert_allclose(fp.apply_operator(op, M).points, want, atol=1e-15)
    assert np.abs(G).sum(axis=1).max() == pytest.approx(0.04)
    assert op.lipschitz_sup == pytest.approx(0.54)


def test_operator_round_trip(r3):
    op = fp.OperatorSpec("custom-table", r3, shift=np.ones(3), matrix=0.1 * np.ones((3, 3)))
    back = fp.OperatorSpec.from_dict(op.to_dict())
    np.testing.assert_array_equal(back.matrix, op.matrix)
    assert op.to_dict()["lambda"] == 0.5


def test_operator_rejects_bad_input(r3):
    with pytest.raises(ValueError):
        fp.OperatorSpec("rotation", r3)
    with pytest.raises(ValueError):
        fp.OperatorSpec("custom-table", r3, matrix=np.eye(2))


def lattice_trials(space, n=4):
    g = np.arange(-n, n + 1) / n
    pts = np.stack(np.meshgrid(*[g] * space.dim, indexing="ij"), -1).reshape(-1, space.dim)
    return [PointCloud(pts, space), PointCloud(2 * pts + 1, space)]


def test_upper_char_half_identity(r3):
    op = fp.OperatorSpec("affine-contraction", r3, 0.5)
    est = fp.estimate_upper_char(op, lattice_trials(r3), GRID)
    assert 0.5 - est.slack <= est.gamma <= 0.5 + est.slack
    assert est.gamma <= 0.5 * (1 + est.slack) + 1e-12


def test_upper_char_constant_and_identity(r3):
    const = fp.OperatorSpec("custom-table", r3, shift=np.ones(3), matrix=np.zeros((3, 3)))
    est = fp.estimate_upper_char(const, lattice_trials(r3), GRID)
    assert est.gamma <= min(GRID) / 0.1
    ident = fp.OperatorSpec("custom-table", r3)
    est = fp.estimate_upper_char(ident, lattice_trials(r3), GRID)
    assert est.gamma >= 1.0


def test_sadovskii_verdicts(r3, rng):
    trials = [PointCloud(rng.uniform(-1, 1, (30, 3)), r3) for _ in range(3)]
    half = fp.OperatorSpec("affine-contraction", r3, 0.5)
    rep = fp.sadovskii_check(half, trials, GRID)
    assert rep.verdict == "condensing"
    assert all(t["slack_ratio"] < 2 for t in rep.trials)
    ident = fp.OperatorSpec("custom-table", r3)
    assert fp.sadovskii_check(ident, trials, GRID).verdict == "not condensing"
    shift = fp.OperatorSpec("affine-contraction", r3, 1.0, np.array([0.3, -2.0, 1.0]))
    assert fp.sadovskii_check(shift, trials, GRID).verdict == "not condensing"


def test_darbo_affine_box(r3):
    c = np.array([0.25, -0.5, 0.125])
    op = fp.OperatorSpec("affine-contraction", r3, 0.5, c)
    M0 = fp.box_vertices(r3, 2 * c, 1.0)
    tr = fp.darbo_solve(op, M0)
    assert tr.residual < 1e-6 and tr.converged
    np.testing.assert_allclose(tr.x_star, 2 * c, atol=1e-6)
    a = tr.alphas()
    gaps = [row.get("thinning_gap", 0.0) for row in tr.iterations]
    acc = 0.0
    for n in range(1, len(a)):
        acc = 0.5 * acc + gaps[n]
        assert a[n] <= 0.5 ** n * a[0] + acc + 1e-9
    assert all(row.get("nesting_defect", 0.0) <= 1e-9 for row in tr.iterations)


def test_darbo_constant_map(r3):
    v = np.array([0.1, 0.2, 0.3])
    op = fp.OperatorSpec("custom-table", r3, shift=v, matrix=np.zeros((3, 3)))
    tr = fp.darbo_solve(op, fp.box_vertices(r3, v, 1.0))
    assert tr.residual == 0.0
    assert tr.iterations[1]["alpha_upper"] == 0.0
    np.testing.assert_array_equal(tr.x_star, v)


def test_darbo_requires_invariance(r3):
    op = fp.OperatorSpec("affine-contraction", r3, 0.5, np.array([5.0, 0, 0]))
    with pytest.raises(fp.InvarianceError):
        fp.darbo_solve(op, fp.box_vertices(r3, np.zeros(3), 1.0))


def test_darbo_gamma_guard(r3):
    op = fp.OperatorSpec("custom-table", r3)
    M0 = fp.box_vertices(r3, np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        fp.darbo_solve(op, M0, trials=lattice_trials(r3), eps_grid=GRID)


def test_darbo_smoothing_matches_plain_iteration():
    sp = make_space("c-grid", 8, 4, {"step": 0.25})
    op = fp.OperatorSpec("contraction-plus-smoothing", sp, 0.5, np.linspace(-1, 1, 8))
    M0 = fp.cross_polytope(sp, np.zeros(8), fp.invariant_radius(op))
    metric = build_fnorm(sp, "gauge")
    tr = fp.darbo_solve(op, M0, metric=metric)
    oracle = fp.plain_iteration(op, np.zeros(8), 1000)
    assert tr.residual < 1e-6
    assert float(metric(tr.x_star, oracle)) < 1e-5
    emitted = tr.emit(op, metric)
    assert emitted["converged"] and emitted["residual"] == tr.residual
