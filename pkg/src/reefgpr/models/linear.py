"""Ordinary least squares and ridge regression through the normal equations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import ReefDataset
from ..linalg import NotPositiveDefiniteError, cholesky, solve_spd
from .base import DimensionError, ModelError, Regressor

JITTER = 1e-10
# a jittered factor whose pivot falls below this share of its diagonal is still singular
RANK_RTOL = 1e-9


class RankDeficiencyError(ModelError):
    pass


@dataclass(frozen=True, eq=False)
class LinearModel(Regressor):
    intercept: float
    weights: np.ndarray
    feature_names: tuple[str, ...] = ()
    kind: str = field(default="linear")

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or not np.isfinite(self.intercept):
            raise ModelError("linear model parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + X @ self.weights

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "intercept": self.intercept,
            "weights": self.weights.tolist(),
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(d["intercept"], d["weights"], tuple(d.get("feature_names", ())))


@dataclass(frozen=True)
class RidgeConfig:
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"ridge lambda must be finite and >= 0, got {self.lam}")


def _solve_with_jitter(A: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    try:
        return solve_spd(A, b).data
    except NotPositiveDefiniteError:
        pass
    Aj = A + JITTER * np.eye(A.shape[0])
    try:
        piv = np.diagonal(cholesky(Aj)) ** 2
        if np.any(piv <= RANK_RTOL * np.diagonal(Aj)):
            raise NotPositiveDefiniteError(f"relative pivot {np.min(piv / np.diagonal(Aj)):.1e}")
        return solve_spd(Aj, b).data
    except NotPositiveDefiniteError as exc:
        raise RankDeficiencyError(
            f"{what}: normal equations stay singular after {JITTER:g} jitter; "
            "some feature columns are collinear (or constant)"
        ) from exc


def fit_ols(train: ReefDataset) -> LinearModel:
    """Least-squares intercept and weights via ``[1 X]^T [1 X] beta = [1 X]^T y``."""
    n, p = train.X.shape
    if n < p + 1:
        raise RankDeficiencyError(f"OLS needs at least {p + 1} rows for {p} features, got {n}")
    D = np.hstack([np.ones((n, 1)), train.X])
    beta = _solve_with_jitter(D.T @ D, D.T @ train.y, "OLS")
    return LinearModel(beta[0], beta[1:], train.feature_names)


def fit_ridge(train: ReefDataset, cfg: RidgeConfig = RidgeConfig()) -> LinearModel:
    """Ridge on centered data so the intercept stays unpenalized.

    Solves ``(Xc^T Xc + lam I) w = Xc^T yc`` and sets
    ``b = mean(y) - w . mean(X)``.
    """
    n, p = train.X.shape
    if n < 1:
        raise ModelError("ridge needs at least one row")
    x_mean = train.X.mean(axis=0)
    y_mean = float(train.y.mean())
    Xc = train.X - x_mean
    yc = train.y - y_mean
    A = Xc.T @ Xc + cfg.lam * np.eye(p)
    w = _solve_with_jitter(A, Xc.T @ yc, f"ridge(lambda={cfg.lam:g})")
    return LinearModel(y_mean - float(w @ x_mean), w, train.feature_names)


def ridge_objective(model: LinearModel, data: ReefDataset, lam: float) -> float:
    """Squared-error sum plus ``lam * ||w||^2`` (intercept not penalized)."""
    r = data.y - model.predict(data.X)
    return float(r @ r + lam * model.weights @ model.weights)


def predict_linear(model: LinearModel, features) -> float:
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise DimensionError(f"model expects {model.n_features} features, got {x.shape}")
    return model.intercept + float(x @ model.weights)
