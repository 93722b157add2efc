import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_dataset
from oracles import brute_force_split
from reefgpr.dataset import SplitConfig, generate_synthetic, split
from reefgpr.metrics import mse
from reefgpr.models.tree import (
    ForestConfig,
    TreeConfig,
    TreeModel,
    best_split,
    entropy,
    fit_forest,
    fit_tree,
    predict_forest,
    predict_tree,
)


def test_entropy_values():
    assert entropy([1.0]) == 0.0
    assert entropy([0.5, 0.5]) == 1.0
    assert entropy([0.5, 0.25, 0.25]) == 1.5
    assert entropy([0.0, 1.0]) == 0.0
    with pytest.raises(ValueError):
        entropy([0.5, 0.4])
    with pytest.raises(ValueError):
        entropy([1.5, -0.5])


def test_best_split_fixture(backend):
    s = best_split(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([0.0, 0.0, 10.0, 10.0]))
    assert (s.feature, s.threshold) == (0, 2.5)
    assert s.sse_reduction == pytest.approx(100.0, abs=1e-12)


def test_best_split_constant_target(backend):
    assert best_split(np.array([[1.0], [2.0], [3.0]]), np.full(3, 0.1)) is None


def test_best_split_respects_min_leaf(backend):
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([0.0, 10.0, 10.0, 10.0])
    assert best_split(X, y, TreeConfig(min_samples_leaf=1)).threshold == 1.5
    assert best_split(X, y, TreeConfig(min_samples_leaf=2)).threshold == 2.5
    assert best_split(X, y, TreeConfig(min_samples_leaf=3)) is None


def test_best_split_tie_breaks_lowest_feature(backend):
    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
    s = best_split(X, np.array([0.0, 0.0, 5.0, 5.0]))
    assert s.feature == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 20), st.integers(1, 4), st.integers(1, 3), st.booleans(), st.integers(0, 2**32 - 1))
def test_best_split_matches_brute_force(n, p, min_leaf, discrete, seed):
    r = np.random.default_rng(seed)
    if discrete:
        X = r.integers(0, 4, size=(n, p)).astype(float)
        y = r.integers(0, 5, size=n).astype(float)
    else:
        X = r.normal(size=(n, p))
        y = r.normal(size=n)
    got = best_split(X, y, TreeConfig(min_samples_leaf=min_leaf))
    want = brute_force_split(X, y, min_leaf)
    if want is None:
        assert got is None
    else:
        assert (got.feature, got.threshold) == want[:2]
        assert got.sse_reduction == pytest.approx(want[2], rel=1e-9, abs=1e-9)


def test_tree_constant_target_single_leaf(backend):
    t = fit_tree(make_dataset(np.arange(6.0), np.full(6, 3.25)))
    assert t.n_nodes == 1 and predict_tree(t, [99.0]) == 3.25


def test_tree_memorizes_distinct_inputs(backend, rng):
    X = rng.normal(size=(50, 3))
    y = rng.normal(size=50)
    t = fit_tree(make_dataset(X, y))
    assert mse(y, t.predict(X)) == 0.0


def test_tree_depth_one_fixture(backend):
    t = fit_tree(make_dataset([1.0, 2.0, 3.0, 4.0], [0.0, 0.0, 10.0, 10.0]))
    assert t.depth() == 1 and t.n_nodes == 3
    assert predict_tree(t, [1.0]) == 0.0 and predict_tree(t, [4.0]) == 10.0
    assert predict_tree(t, [2.5]) == 0.0  # ties go left


def test_tree_training_sse_non_increasing_with_depth(backend, rng):
    X = rng.normal(size=(80, 3))
    ds = make_dataset(X, X[:, 0] ** 2 + np.sin(3 * X[:, 1]) + 0.1 * rng.normal(size=80))
    errs = []
    for d in range(0, 9):
        t = fit_tree(ds, TreeConfig(max_depth=d))
        assert t.depth() <= d
        errs.append(mse(ds.y, t.predict(ds.X)))
    assert all(a >= b for a, b in zip(errs, errs[1:]))


def test_tree_config_validation():
    with pytest.raises(ValueError):
        TreeConfig(min_samples_split=1)
    with pytest.raises(ValueError):
        TreeConfig(min_samples_leaf=0)


def test_leaf_only_tree():
    t = TreeModel([-1], [0.0], [-1], [-1], [2.5], 3)
    assert predict_tree(t, [1.0, 2.0, 3.0]) == 2.5


def test_degenerate_forest_equals_tree(backend, rng):
    X = rng.normal(size=(40, 4))
    ds = make_dataset(X, X @ [1, -1, 2, 0] + rng.normal(size=40))
    t = fit_tree(ds)
    f = fit_forest(ds, ForestConfig(n_trees=1, max_features=4, bootstrap=False, seed=1))
    Xt = rng.normal(size=(30, 4))
    assert np.array_equal(f.predict(Xt), t.predict(Xt))


def test_forest_predictions_within_target_range(backend, rng):
    X = rng.normal(size=(60, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=60)
    f = fit_forest(make_dataset(X, y), ForestConfig(n_trees=20, seed=3))
    p = f.predict(rng.normal(0, 5, size=(200, 5)))
    slack = 1e-12 * np.max(np.abs(y))
    assert p.min() >= y.min() - slack and p.max() <= y.max() + slack


def test_forest_identical_trees_average():
    t = TreeModel([0, -1, -1], [0.5, 0, 0], [1, -1, -1], [2, -1, -1], [0.0, 1.0, 3.0], 1)
    from reefgpr.models.tree import ForestModel

    f = ForestModel((t, t, t))
    for x in ([0.0], [1.0]):
        assert predict_forest(f, x) == predict_tree(t, x)


def test_forest_deterministic_per_seed(backend, rng):
    X = rng.normal(size=(50, 6))
    ds = make_dataset(X, X[:, 0] + rng.normal(size=50))
    Xt = rng.normal(size=(20, 6))
    a = fit_forest(ds, ForestConfig(n_trees=10, seed=42)).predict(Xt)
    b = fit_forest(ds, ForestConfig(n_trees=10, seed=42)).predict(Xt)
    c = fit_forest(ds, ForestConfig(n_trees=10, seed=43)).predict(Xt)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_forest_beats_single_tree_on_noisy_linear_data():
    w = np.linspace(-2, 2, 8)
    ds = generate_synthetic(400, 8, w, 1.0, 0.5, seed=12)
    tr, te = split(ds, SplitConfig(0.6, 5))
    single = mse(te.y, fit_tree(tr).predict(te.X))
    forest = mse(te.y, fit_forest(tr, ForestConfig(n_trees=100, seed=5)).predict(te.X))
    assert forest <= single


def test_forest_max_features_default_and_bounds():
    assert ForestConfig().resolved_max_features(18) == math.ceil(18 / 3) == 6
    with pytest.raises(ValueError):
        ForestConfig(max_features=5).resolved_max_features(4)


def test_dimension_mismatch():
    t = fit_tree(make_dataset([[1.0, 2.0], [2.0, 1.0]], [0.0, 1.0]))
    with pytest.raises(ValueError):
        t.predict([1.0])
