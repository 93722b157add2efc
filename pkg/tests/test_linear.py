import numpy as np
import pytest

from helpers import make_dataset
from oracles import ols_gradient_descent
from reefgpr.dataset import generate_synthetic
from reefgpr.models.linear import (
    LinearModel,
    RankDeficiencyError,
    RidgeConfig,
    fit_ols,
    fit_ridge,
    predict_linear,
    ridge_objective,
)


def test_ols_exact_line():
    m = fit_ols(make_dataset([0.0, 1.0, 2.0], [1.0, 3.0, 5.0]))
    assert m.intercept == pytest.approx(1.0, abs=1e-12)
    assert m.weights[0] == pytest.approx(2.0, abs=1e-12)
    assert np.mean((m.predict([[0.0], [1.0], [2.0]]) - [1.0, 3.0, 5.0]) ** 2) < 1e-24


def test_ols_noiseless_recovery():
    w = np.array([1.5, -2.0, 0.25, 3.0, -0.75])
    ds = generate_synthetic(200, 5, w, 2.0, 0.0, seed=4)
    m = fit_ols(ds)
    np.testing.assert_allclose(m.weights, w, atol=1e-8)
    assert m.intercept == pytest.approx(2.0, abs=1e-8)
    np.testing.assert_allclose(m.predict(ds.X), ds.y, atol=1e-8)


def test_ols_vs_gradient_descent(rng):
    X = rng.uniform(-1, 1, size=(30, 3))
    y = 0.5 + X @ [1.0, -1.0, 2.0] + rng.normal(0, 0.3, 30)
    m = fit_ols(make_dataset(X, y))
    theta = ols_gradient_descent(X, y)
    np.testing.assert_allclose(np.r_[m.intercept, m.weights], theta, atol=1e-4)


def test_ols_residuals_orthogonal(rng):
    X = rng.normal(size=(80, 4))
    y = X @ [1.0, 2.0, 0.0, -1.0] + rng.normal(size=80)
    m = fit_ols(make_dataset(X, y))
    r = y - m.predict(X)
    assert np.all(np.abs(X.T @ r) <= 1e-6 * len(y))
    assert abs(r.sum()) <= 1e-6 * len(y)


def test_ols_rank_deficient(rng):
    x = rng.normal(size=50)
    with pytest.raises(RankDeficiencyError, match="collinear"):
        fit_ols(make_dataset(np.c_[x, 2 * x], 3 * x))
    # raw-scale columns (alkalinity ~2300) must still be caught
    with pytest.raises(RankDeficiencyError):
        fit_ols(make_dataset(np.c_[2300 + x, 4600 + 2 * x], x))
    with pytest.raises(RankDeficiencyError):
        fit_ols(make_dataset([[1.0, 2.0]], [1.0]))


def test_ols_tolerates_near_collinearity(rng):
    x = rng.normal(size=50)
    z = 2 * x + 1e-4 * rng.normal(size=50)
    m = fit_ols(make_dataset(np.c_[x, z], x + z))
    np.testing.assert_allclose(m.weights, [1.0, 1.0], atol=1e-5)


def test_ridge_zero_lambda_matches_ols(rng):
    X = rng.normal(size=(50, 4))
    ds = make_dataset(X, X @ [1, 2, 3, 4] + 10 + rng.normal(size=50))
    o, r = fit_ols(ds), fit_ridge(ds, RidgeConfig(0.0))
    np.testing.assert_allclose(r.weights, o.weights, atol=1e-9)
    assert r.intercept == pytest.approx(o.intercept, abs=1e-9)


def test_ridge_one_feature_closed_form():
    m = fit_ridge(make_dataset([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]), RidgeConfig(1.0))
    assert m.weights[0] == pytest.approx(2 / 3, abs=1e-15)
    assert m.intercept == pytest.approx(0.0, abs=1e-15)


def test_ridge_huge_lambda_predicts_mean(rng):
    X = rng.normal(size=(40, 3))
    y = 7.0 + X @ [1.0, -1.0, 0.5] + rng.normal(size=40)
    m = fit_ridge(make_dataset(X, y), RidgeConfig(1e9))
    assert np.linalg.norm(m.weights) < 1e-6
    np.testing.assert_allclose(m.predict(X), y.mean(), atol=1e-5)


def test_ridge_norm_shrinks_with_lambda(rng):
    X = rng.normal(size=(60, 5))
    ds = make_dataset(X, X @ rng.normal(size=5) + rng.normal(size=60))
    norms = [np.linalg.norm(fit_ridge(ds, RidgeConfig(lam)).weights) for lam in (0, 0.1, 1, 10, 100)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_ridge_objective_is_local_minimum(rng):
    X = rng.normal(size=(30, 3))
    ds = make_dataset(X, X @ [1.0, 0.0, -2.0] + 3 + rng.normal(size=30))
    lam = 2.5
    m = fit_ridge(ds, RidgeConfig(lam))
    base = ridge_objective(m, ds, lam)
    # intercept is the unpenalized optimum, so perturb weights only and re-center it
    for _ in range(1000):
        d = rng.normal(size=3)
        d *= 1e-3 / np.linalg.norm(d)
        w = m.weights + d
        b = ds.y.mean() - ds.X.mean(axis=0) @ w
        assert ridge_objective(LinearModel(b, w), ds, lam) >= base


def test_ridge_config_validation():
    with pytest.raises(ValueError):
        RidgeConfig(-1.0)
    with pytest.raises(ValueError):
        RidgeConfig(float("inf"))


def test_predict_linear_examples():
    assert predict_linear(LinearModel(1.0, [2.0]), [3.0]) == 7.0
    assert predict_linear(LinearModel(4.5, [0.0, 0.0]), [123.0, -9.0]) == 4.5
    with pytest.raises(ValueError):
        predict_linear(LinearModel(1.0, [2.0]), [1.0, 2.0])
