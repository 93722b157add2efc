"""R², MSE and MAE plus the per-model comparison report."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import ReefDataset


class UndefinedR2Error(ValueError):
    pass


def _pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y_true, dtype=np.float64).ravel()
    b = np.asarray(y_pred, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} true vs {b.shape[0]} predicted")
    if a.shape[0] == 0:
        raise ValueError("metrics need at least one value")
    return a, b


def mse(y_true, y_pred) -> float:
    a, b = _pair(y_true, y_pred)
    return math.fsum(((a - b) ** 2).tolist()) / a.shape[0]


def mae(y_true, y_pred) -> float:
    a, b = _pair(y_true, y_pred)
    return math.fsum(np.abs(a - b).tolist()) / a.shape[0]


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``; negative when worse than the mean."""
    a, b = _pair(y_true, y_pred)
    mean = math.fsum(a.tolist()) / a.shape[0]
    ss_tot = math.fsum(((a - mean) ** 2).tolist())
    if ss_tot == 0.0:
        raise UndefinedR2Error("R² is undefined for a constant target (SS_tot = 0)")
    ss_res = math.fsum(((a - b) ** 2).tolist())
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class EvalRow:
    model_name: str
    r2: float
    mse: float
    mae: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]
    split: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = [r.model_name for r in self.rows]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate model names in report: {names}")

    def row(self, name: str) -> EvalRow:
        for r in self.rows:
            if r.model_name == name:
                return r
        raise KeyError(name)

    def to_text(self) -> str:
        width = max([len("Algorithm / Metric")] + [len(r.model_name) for r in self.rows])
        lines = [f"{'Algorithm / Metric':<{width}}  {'R2':>12}  {'MSE':>14}  {'MAE':>12}"]
        for r in self.rows:
            lines.append(f"{r.model_name:<{width}}  {r.r2:>12.6f}  {r.mse:>14.6f}  {r.mae:>12.6f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "r2", "mse", "mae"])
        for r in self.rows:
            w.writerow([r.model_name, f"{r.r2:.6f}", f"{r.mse:.6f}", f"{r.mae:.6f}"])
        return buf.getvalue()


def evaluate(name: str, model, test: ReefDataset) -> EvalRow:
    try:
        pred = model.predict(test.X)
    except ValueError as exc:
        raise type(exc)(f"{name}: {exc}") from exc
    return EvalRow(name, r2_score(test.y, pred), mse(test.y, pred), mae(test.y, pred))


def evaluate_all(models: Sequence[tuple[str, object]], test: ReefDataset, *, split: dict | None = None,
                 config: dict | None = None) -> EvalReport:
    """One row per ``(name, model)`` pair, in the given order."""
    if test.n_rows == 0:
        raise ValueError("evaluation needs a non-empty test set")
    rows = tuple(evaluate(name, m, test) for name, m in models)
    return EvalReport(rows, split or {}, config or {})
