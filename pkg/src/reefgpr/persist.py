"""JSON persistence for fitted models and ensemble manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Standardizer
from .models.base import ModelError, Regressor
from .models.ensemble import EnsembleModel
from .models.linear import LinearModel
from .models.svr import SvrModel
from .models.tree import ForestModel, TreeModel

_LOADERS = {
    "linear": LinearModel.from_dict,
    "svr": SvrModel.from_dict,
    "tree": TreeModel.from_dict,
    "forest": ForestModel.from_dict,
}


@dataclass(frozen=True, eq=False)
class StandardizedModel(Regressor):
    """A model fitted on standardized features, applied to raw features."""

    inner: Regressor
    standardizer: Standardizer
    kind: str = field(default="standardized")

    @property
    def n_features(self) -> int:
        return self.inner.n_features

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(getattr(self.inner, "feature_names", ()))

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        return self.inner._predict_rows(self.standardizer.transform(X))

    def to_dict(self) -> dict:
        d = self.inner.to_dict()
        d["standardizer"] = self.standardizer.to_dict()
        return d


def model_to_dict(model: Regressor) -> dict:
    if isinstance(model, EnsembleModel):
        raise ModelError("ensembles persist as manifests; use save_ensemble")
    return model.to_dict()


def model_from_dict(d: dict) -> Regressor:
    try:
        loader = _LOADERS[d["kind"]]
    except KeyError:
        raise ModelError(f"unknown model kind {d.get('kind')!r}") from None
    model = loader(d)
    if "standardizer" in d:
        return StandardizedModel(model, Standardizer.from_dict(d["standardizer"]))
    return model


def dumps(d: dict) -> str:
    return json.dumps(d, indent=1, allow_nan=False) + "\n"


def save_model(model: Regressor, path) -> None:
    Path(path).write_text(dumps(model_to_dict(model)), encoding="utf-8")


def save_ensemble(model: EnsembleModel, member_files, path) -> None:
    """Write the manifest; ``member_files`` are paths relative to the manifest."""
    names = list(model.names)
    doc = {
        "kind": "ensemble",
        "aggregation": model.aggregation,
        "members": [{"name": n, "file": str(f)} for n, f in zip(names, member_files)],
    }
    Path(path).write_text(dumps(doc), encoding="utf-8")


def load_model(path) -> Regressor:
    """Load a model file or an ensemble manifest (members resolved next to it)."""
    path = Path(path)
    d = json.loads(path.read_text(encoding="utf-8"))
    if d.get("kind") == "ensemble":
        members = [load_model(path.parent / m["file"]) for m in d["members"]]
        return EnsembleModel(tuple(members), tuple(m["name"] for m in d["members"]), d.get("aggregation", "mean"))
    return model_from_dict(d)


def feature_names_of(model: Regressor) -> tuple[str, ...]:
    if isinstance(model, EnsembleModel):
        return feature_names_of(model.members[0])
    return tuple(getattr(model, "feature_names", ()))
