import math

import numpy as np
import pytest

import treeging as tg


def small_field(seed=1):
    return tg.simulate_spatial(eta=1.0, nu=0.5, n_train=60, grid_side=6, seed=seed)


def test_simulate_shapes():
    f = small_field()
    assert len(f["train"]) == 60
    assert len(f["test"]) == 36
    assert f["train"].X.shape == (60, 3)
    iv = tg.simulate_spatial(n_train=10, grid_side=0, scenario="iv")
    assert iv["train"].X.shape == (10, 19)
    assert f["train"].coords.shape == (60, 2)
    st = tg.simulate_spacetime(n_train_locs=5, grid_side=3, n_times=4)
    assert st["train"].is_spacetime
    assert st["train"].coords.shape == (20, 3)


@pytest.mark.parametrize("model", tg.MODELS)
def test_fit_predict_round_trip(model, tmp_path):
    f = small_field()
    m = tg.fit(model, f["train"], seed=3, n_learners=4)
    assert m.kind == model
    pred = m.predict(f["test"])
    assert pred.shape == (36,)
    assert np.all(np.isfinite(pred))
    again = tg.FittedModel.from_archive(m.to_archive())
    assert np.array_equal(again.predict(f["test"]), pred)
    path = str(tmp_path / "m.json")
    m.save(path)
    assert np.array_equal(tg.FittedModel.load(path).predict(f["test"]), pred)


def test_jobs_do_not_change_results():
    f = small_field(2)
    a = tg.fit("treeging", f["train"], seed=5, n_learners=4, jobs=1).predict(f["test"])
    b = tg.fit("treeging", f["train"], seed=5, n_learners=4, jobs=3).predict(f["test"], jobs=2)
    assert np.array_equal(a, b)


def test_kriging_interpolates_training_points():
    rng = np.random.default_rng(0)
    coords = rng.uniform(0, 10, size=(30, 2))
    X = rng.normal(size=(30, 1))
    y = 1 + X[:, 0] + np.sin(coords[:, 0])
    d = tg.Dataset(coords, X, y)
    m = tg.fit("kriging", d)
    assert np.max(np.abs(m.predict(d) - y)) < 1e-6


def test_cross_validate_and_r2():
    f = small_field(4)
    out = tg.cross_validate("rf", f["train"], mode="row", k=5, n_learners=10)
    assert len(out["per_fold_r2"]) == 5
    assert math.isfinite(out["r2"])
    y = np.array([1.0, 2.0, 3.0])
    assert tg.r_squared(y, y) == 1.0
    assert tg.r_squared(y, np.full(3, 2.0)) == 0.0


def test_spherical_closed_forms():
    p = tg.SphericalParams(nugget=0.2, sill=1.0, range=2.0)
    assert tg.spherical_variogram(0.0, p) == 0.0
    assert tg.spherical_covariance(5.0, p) == 0.0
    for h in (0.0, 0.5, 1.0, 2.0, 4.0):
        assert abs(tg.spherical_variogram(h, p) + tg.spherical_covariance(h, p) - 1.0) < 1e-12


def test_errors_carry_kind():
    f = small_field()
    with pytest.raises(tg.TreegingError) as info:
        tg.fit("nope", f["train"])
    assert info.value.kind == "config"
    assert info.value.exit_code == 17
    with pytest.raises(tg.TreegingError) as info:
        tg.FittedModel.from_archive('{"version": 99}')
    assert info.value.kind == "archive-version"
    with pytest.raises(tg.TreegingError):
        tg.SphericalParams(nugget=2.0, sill=1.0, range=1.0)
