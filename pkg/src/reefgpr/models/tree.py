"""CART regression trees, random forests, and the entropy utility."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import _kernels
from ..dataset import ReefDataset
from ..rng import SplitMix64, derive_seed
from .base import ModelError, Regressor

LEAF = -1


def entropy(proportions) -> float:
    """Shannon entropy in bits, ``sum(-p * log2 p)`` with ``0 log 0 = 0``."""
    p = [float(v) for v in proportions]
    if any(not 0.0 <= v <= 1.0 for v in p):
        raise ValueError("proportions must lie in [0, 1]")
    if abs(math.fsum(p) - 1.0) > 1e-9:
        raise ValueError(f"proportions sum to {math.fsum(p)!r}, expected 1")
    return math.fsum(-v * math.log2(v) for v in p if v > 0.0)


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeConfig":
        return cls(d.get("max_depth"), int(d.get("min_samples_split", 2)), int(d.get("min_samples_leaf", 1)))


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    sse_reduction: float


def best_split(X: np.ndarray, y: np.ndarray, cfg: TreeConfig = TreeConfig(),
               idx=None, features: Sequence[int] | None = None) -> Split | None:
    """Split of rows ``idx`` maximizing ``SSE(parent) - SSE(left) - SSE(right)``.

    Thresholds are midpoints between adjacent distinct values; rows with
    ``x <= threshold`` go left. Ties go to the lowest feature index, then the
    lowest threshold. ``None`` when nothing strictly reduces SSE.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if idx is None:
        idx = np.arange(X.shape[0])
    if features is None:
        features = range(X.shape[1])
    f, thr, gain = _kernels.best_split(X, y, np.asarray(idx, dtype=np.intp),
                                       [int(v) for v in features], cfg.min_samples_leaf)
    return None if f < 0 else Split(int(f), float(thr), float(gain))


@dataclass(frozen=True, eq=False)
class TreeModel(Regressor):
    """Flat array tree; node 0 is the root, ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features_in: int
    feature_names: tuple[str, ...] = ()
    kind: str = field(default="tree")

    def __post_init__(self) -> None:
        for name, dt in (("feature", np.intp), ("threshold", np.float64), ("left", np.intp),
                         ("right", np.intp), ("value", np.float64)):
            a = np.array(getattr(self, name), dtype=dt, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return self.n_features_in

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, dtype=np.intp)
        for k in range(self.n_nodes):
            if self.feature[k] != LEAF:
                d[self.left[k]] = d[self.right[k]] = d[k] + 1
        return int(d.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = self.feature[node] != LEAF
        while active.any():
            nd = node[active]
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return node

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def split_counts(self) -> np.ndarray:
        internal = self.feature[self.feature != LEAF]
        return np.bincount(internal, minlength=self.n_features_in)

    def _node_dict(self, k: int) -> dict:
        if self.feature[k] == LEAF:
            return {"leaf_value": float(self.value[k])}
        return {
            "feature": int(self.feature[k]),
            "threshold": float(self.threshold[k]),
            "left": self._node_dict(int(self.left[k])),
            "right": self._node_dict(int(self.right[k])),
        }

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features_in,
            "feature_names": list(self.feature_names),
            "root": self._node_dict(0),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        feat, thr, left, right, val = [], [], [], [], []

        def add(node: dict) -> int:
            k = len(feat)
            feat.append(LEAF)
            thr.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            val.append(0.0)
            if "leaf_value" in node:
                val[k] = float(node["leaf_value"])
            else:
                feat[k] = int(node["feature"])
                thr[k] = float(node["threshold"])
                left[k] = add(node["left"])
                right[k] = add(node["right"])
            return k

        add(d["root"])
        return cls(feat, thr, left, right, val, int(d["n_features"]), tuple(d.get("feature_names", ())))


def _grow(X: np.ndarray, y: np.ndarray, rows: np.ndarray, cfg: TreeConfig,
          choose: Callable[[], Sequence[int]], names: tuple[str, ...]) -> TreeModel:
    feat, thr, left, right, val = [], [], [], [], []
    stack = [(rows, 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        k = len(feat)
        feat.append(LEAF)
        thr.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        val.append(float(np.mean(y[idx])))
        if parent >= 0:
            if is_right:
                right[parent] = k
            else:
                left[parent] = k
        if idx.shape[0] < cfg.min_samples_split:
            continue
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            continue
        f, t, _ = _kernels.best_split(X, y, idx, list(choose()), cfg.min_samples_leaf)
        if f < 0:
            continue
        feat[k] = f
        thr[k] = t
        mask = X[idx, f] <= t
        # right pushed first so the left subtree is numbered first
        stack.append((idx[~mask], depth + 1, k, True))
        stack.append((idx[mask], depth + 1, k, False))
    return TreeModel(feat, thr, left, right, val, X.shape[1], names)


def fit_tree(train: ReefDataset, cfg: TreeConfig = TreeConfig()) -> TreeModel:
    if train.n_rows == 0:
        raise ModelError("cannot fit a tree on zero rows")
    all_features = list(range(train.n_features))
    return _grow(train.X, train.y, np.arange(train.n_rows, dtype=np.intp), cfg,
                 lambda: all_features, train.feature_names)


def predict_tree(model: TreeModel, features) -> float:
    return model.predict_one(features)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int | None = None  # None -> ceil(p / 3)
    bootstrap: bool = True
    seed: int = 0
    tree: TreeConfig = field(default_factory=TreeConfig)

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1")

    def resolved_max_features(self, p: int) -> int:
        m = math.ceil(p / 3) if self.max_features is None else self.max_features
        if m > p:
            raise ValueError(f"max_features={m} exceeds the {p} available features")
        return max(1, m)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "tree": self.tree.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestConfig":
        return cls(int(d.get("n_trees", 100)), d.get("max_features"), bool(d.get("bootstrap", True)),
                   int(d.get("seed", 0)), TreeConfig.from_dict(d.get("tree", {})))


@dataclass(frozen=True, eq=False)
class ForestModel(Regressor):
    trees: tuple[TreeModel, ...]
    tree_seeds: tuple[int, ...] = ()
    config: ForestConfig | None = None
    kind: str = field(default="forest")

    def __post_init__(self) -> None:
        if not self.trees:
            raise ModelError("a forest needs at least one tree")
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "tree_seeds", tuple(self.tree_seeds))

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.trees[0].feature_names

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        return np.mean(np.stack([t._predict_rows(X) for t in self.trees]), axis=0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config.to_dict() if self.config else None,
            "tree_seeds": [str(s) for s in self.tree_seeds],
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        cfg = ForestConfig.from_dict(d["config"]) if d.get("config") else None
        return cls(tuple(TreeModel.from_dict(t) for t in d["trees"]),
                   tuple(int(s) for s in d.get("tree_seeds", ())), cfg)


def fit_forest(train: ReefDataset, cfg: ForestConfig = ForestConfig()) -> ForestModel:
    """Bagged trees with fresh per-split feature subsampling.

    Tree ``t`` draws from ``SplitMix64(derive_seed(cfg.seed, f"tree/{t}"))``:
    first ``n`` bootstrap indices (when enabled), then one feature subset per
    attempted split.
    """
    n, p = train.X.shape
    if n == 0:
        raise ModelError("cannot fit a forest on zero rows")
    m = cfg.resolved_max_features(p)
    trees, seeds = [], []
    for t in range(cfg.n_trees):
        s = derive_seed(cfg.seed, f"tree/{t}")
        rng = SplitMix64(s)
        if cfg.bootstrap:
            rows = np.array([rng.randbelow(n) for _ in range(n)], dtype=np.intp)
        else:
            rows = np.arange(n, dtype=np.intp)
        if m == p:
            choose = lambda: range(p)  # noqa: E731
        else:
            choose = lambda rng=rng: sorted(rng.sample(p, m))  # noqa: E731
        trees.append(_grow(train.X, train.y, rows, cfg.tree, choose, train.feature_names))
        seeds.append(s)
    return ForestModel(tuple(trees), tuple(seeds), cfg)


def predict_forest(model: ForestModel, features) -> float:
    return model.predict_one(features)
