from __future__ import annotations

import numpy as np


class ModelError(ValueError):
    pass


class DimensionError(ModelError):
    pass


def as_rows(X, n_features: int) -> np.ndarray:
    """Coerce one row or a batch to a 2-D float array with ``n_features`` columns."""
    a = np.asarray(X, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != n_features:
        raise DimensionError(f"model expects {n_features} features, got shape {np.shape(X)}")
    return a


class Regressor:
    """Shared prediction contract of every fitted model.

    Subclasses implement ``_predict_rows`` on a validated 2-D array and
    ``to_dict`` for JSON persistence.
    """

    kind: str = ""
    n_features: int = 0

    def predict(self, X) -> np.ndarray:
        return self._predict_rows(as_rows(X, self.n_features))

    def predict_one(self, x) -> float:
        return float(self.predict(x)[0])

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError
