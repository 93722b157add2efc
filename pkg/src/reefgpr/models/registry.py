"""Model specs from config, and the default roster in report order."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dataset import ReefDataset
from .base import ModelError, Regressor
from .linear import RidgeConfig, fit_ols, fit_ridge
from .svr import KernelSpec, SvrConfig, fit_svr
from .tree import ForestConfig, TreeConfig, fit_forest, fit_tree

KINDS = ("ols", "ridge", "svr", "tree", "forest")
_TREE_KEYS = ("max_depth", "min_samples_split", "min_samples_leaf")


@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}; choose from {KINDS}")

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(d["name"], d["kind"], dict(d.get("params", {})))


def svr_config(params: dict) -> SvrConfig:
    kernel = KernelSpec(
        kind=params.get("kernel", "rbf"),
        degree=int(params.get("degree", 3)),
        gamma=params.get("gamma"),
        coef0=float(params.get("coef0", 0.0)),
    )
    return SvrConfig(
        c=float(params.get("c", 1.0)),
        epsilon=float(params.get("epsilon", 0.1)),
        kernel=kernel,
        tol=float(params.get("tol", 1e-3)),
        max_passes=int(params.get("max_passes", 200)),
    )


def tree_config(params: dict) -> TreeConfig:
    return TreeConfig.from_dict({k: params[k] for k in _TREE_KEYS if k in params})


def forest_config(params: dict, seed: int) -> ForestConfig:
    return ForestConfig(
        n_trees=int(params.get("n_trees", 100)),
        max_features=params.get("max_features"),
        bootstrap=bool(params.get("bootstrap", True)),
        seed=int(params.get("seed", seed)),
        tree=tree_config(params),
    )


def fit_model(spec: ModelSpec, train: ReefDataset, seed: int = 0) -> Regressor:
    """Fit one spec. ``seed`` only matters for forests without an explicit seed."""
    p = spec.params
    if spec.kind == "ols":
        return fit_ols(train)
    if spec.kind == "ridge":
        return fit_ridge(train, RidgeConfig(float(p.get("lambda", 1.0))))
    if spec.kind == "svr":
        return fit_svr(train, svr_config(p))
    if spec.kind == "tree":
        return fit_tree(train, tree_config(p))
    return fit_forest(train, forest_config(p, seed))


def default_roster() -> list[ModelSpec]:
    return [
        ModelSpec("Linear Regression", "ols"),
        ModelSpec("SVR Linear", "svr", {"kernel": "linear"}),
        ModelSpec("SVR Poly", "svr", {"kernel": "polynomial", "degree": 3, "coef0": 0.0}),
        ModelSpec("SVR RBF", "svr", {"kernel": "rbf"}),
        ModelSpec("Decision Trees", "tree"),
        ModelSpec("Random Forests", "forest", {"n_trees": 100}),
        ModelSpec("Ridge Regression", "ridge", {"lambda": 1.0}),
    ]
