import numpy as np
import pytest

from fmnc.space import PointCloud, SpaceMismatch, SpaceModel, make_space, seminorm_eval, shipped_spaces


def test_c_grid_has_nested_sup_seminorms():
    sp = make_space("c-grid", 8, 4, {"step": 0.25})
    fam = sp.seminorm_family
    assert len(fam) == 4
    assert all(s.kind == "sup" for s in fam)
    assert sp.locally_convex


def test_lp_grid_below_one_is_not_locally_convex():
    sp = make_space("lp-grid", 4, 1, {"p": 0.5, "step": 1.0})
    assert not sp.locally_convex


def test_seq_product_blocks():
    sp = make_space("seq-product", 6, 3, {"blocks": [2, 2, 2]})
    assert [s.kind for s in sp.seminorm_family] == ["l1"] * 3


def test_seminorm_examples():
    sp = make_space("c-grid", 8, 4, {"step": 0.25})
    for k in range(1, 5):
        assert seminorm_eval(sp, k, np.full(8, 2.0)) == 2.0
        assert seminorm_eval(sp, k, np.zeros(8)) == 0.0
    seq = make_space("seq-product", 6, 3, {"blocks": [2, 2, 2]})
    assert seminorm_eval(seq, 3, np.array([1.0, -1, 0, 0, 3, 0])) == 3.0


def test_c_grid_seminorms_increase_with_k(rng):
    sp = make_space("c-grid", 32, 8, {"step": 0.125})
    x = rng.normal(size=(50, 32))
    s = sp.seminorms(x)
    assert np.all(np.diff(s, axis=1) >= 0)


@pytest.mark.parametrize("kind,dim,m,params", [
    ("c-grid", 8, 0, {}),
    ("c-grid", 0, 1, {}),
    ("seq-product", 6, 3, {"blocks": [2, 2]}),
    ("lp-grid", 4, 2, {"p": 0.5}),
    ("lp-grid", 4, 1, {"p": 0.0}),
    ("torus", 4, 1, {}),
    ("c-grid", 4, 1, {"colour": 1}),
])
def test_bad_descriptors_raise(kind, dim, m, params):
    with pytest.raises(ValueError):
        make_space(kind, dim, m, params)


def test_seminorm_index_out_of_range():
    sp = make_space("c-grid", 4, 2)
    with pytest.raises(IndexError):
        seminorm_eval(sp, 3, np.zeros(4))


def test_dimension_mismatch():
    sp = make_space("c-grid", 4, 2)
    with pytest.raises(SpaceMismatch):
        sp.check(np.zeros(5))


def test_descriptor_round_trip():
    for sp in shipped_spaces():
        assert SpaceModel.from_dict(sp.to_dict()) == sp


def test_cloud_round_trip(rng):
    sp = make_space("seq-product", 12, 4, {"blocks": [2, 3, 3, 4]})
    M = PointCloud(rng.normal(size=(7, 12)), sp, "M")
    back = PointCloud.from_dict(M.to_dict())
    assert back.space == sp
    np.testing.assert_array_equal(back.points, M.points)
