"""Bagging-style ensemble: members trained on the same schema, predictions averaged."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..dataset import ReefDataset
from ..rng import SplitMix64, derive_seed
from .base import ModelError, Regressor
from .registry import ModelSpec, fit_model


class MemberFitError(ModelError):
    def __init__(self, index: int, name: str, cause: Exception) -> None:
        super().__init__(f"ensemble member {index} ({name}) failed to fit: {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True, eq=False)
class EnsembleModel(Regressor):
    members: tuple[Regressor, ...]
    names: tuple[str, ...] = ()
    aggregation: str = "mean"
    kind: str = field(default="ensemble")

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise ModelError("an ensemble needs at least one member")
        p = {m.n_features for m in members}
        if len(p) != 1:
            raise ModelError(f"ensemble members disagree on feature count: {sorted(p)}")
        if self.aggregation != "mean":
            raise ModelError(f"unsupported aggregation {self.aggregation!r}")
        object.__setattr__(self, "members", members)
        names = tuple(self.names) or tuple(f"member_{i}" for i in range(len(members)))
        object.__setattr__(self, "names", names)

    @property
    def n_features(self) -> int:
        return self.members[0].n_features

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        preds = np.stack([m._predict_rows(X) for m in self.members], axis=1)
        if preds.shape[1] == 1:
            return preds[:, 0].copy()
        k = preds.shape[1]
        # exactly rounded sum: independent of member order
        return np.array([math.fsum(row) / k for row in preds.tolist()])

    def member_predictions(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.stack([m.predict(X) for m in self.members])


def fit_ensemble(train: ReefDataset, member_specs: Sequence[ModelSpec], bootstrap: bool = False,
                 seed: int = 0) -> EnsembleModel:
    """Fit each spec and average.

    With ``bootstrap`` off every member sees the identical training set; with
    it on, member ``i`` trains on an ``n``-row resample drawn from
    ``SplitMix64(derive_seed(seed, f"bag/{i}"))``.
    """
    if not member_specs:
        raise ModelError("fit_ensemble needs at least one member spec")
    members = []
    n = train.n_rows
    for i, spec in enumerate(member_specs):
        data = train
        if bootstrap:
            rng = SplitMix64(derive_seed(seed, f"bag/{i}"))
            data = train.take([rng.randbelow(n) for _ in range(n)])
        try:
            members.append(fit_model(spec, data, seed=derive_seed(seed, f"member/{i}")))
        except Exception as exc:
            raise MemberFitError(i, spec.name, exc) from exc
    return EnsembleModel(tuple(members), tuple(s.name for s in member_specs))


def predict_ensemble(model: EnsembleModel, features) -> float:
    return model.predict_one(features)
