"""Tank-chemistry table ingestion, splitting, scaling and synthetic data."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .rng import SplitMix64

FEATURE_NUMERIC = "feature_numeric"
FEATURE_BINARY = "feature_binary"
TARGET = "target"
DROPPED = "dropped"

DEFAULT_FEATURES = (
    "Tank_TA",
    "Tank_Temperature",
    "Tank_pH",
    "Tank_Phosphate",
    "Tank_Nitrate",
    "Tank_Silicate",
    "Tank_CO2",
    "Tank_HCO3",
    "Tank_CO3",
    "Tank_DIC",
    "Tank_Aragonite_Saturation",
    "Tank_Calcite_Saturation",
    "Residence_Time",
    "Flow_Rate",
    "Surface_Area",
    "AFDW",
    "Day_Night",
    "Respiration",
)
DEFAULT_BINARY = ("Day_Night",)
DEFAULT_TARGET = "Gross_Community_Production_Rate"
DEFAULT_DROPPED = (
    "Header_TA",
    "Header_Temperature",
    "Header_pH",
    "Tank_pCO2",
    "Tank_fCO2",
    "Net_Community_Calcification_Rate",
    "Gross_Community_Calcification_Rate",
    "Net_Community_Production_Rate",
    "Dry_Weight",
)

_BINARY_TOKENS = {"day": 1.0, "night": 0.0, "1": 1.0, "0": 0.0, "1.0": 1.0, "0.0": 0.0}


class SchemaError(ValueError):
    pass


class EmptyDatasetError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str


@dataclass(frozen=True)
class SchemaConfig:
    """Which CSV columns are features, which is the target, which are dropped.

    Header columns not named here are ignored as if dropped.
    """

    features: tuple[str, ...] = DEFAULT_FEATURES
    target: str = DEFAULT_TARGET
    binary_features: tuple[str, ...] = DEFAULT_BINARY
    dropped: tuple[str, ...] = DEFAULT_DROPPED

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "binary_features", tuple(self.binary_features))
        object.__setattr__(self, "dropped", tuple(self.dropped))
        if not self.features:
            raise SchemaError("schema needs at least one feature")
        names = list(self.features) + [self.target]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise SchemaError(f"duplicate column names in schema: {dupes}")
        stray = [b for b in self.binary_features if b not in self.features]
        if stray:
            raise SchemaError(f"binary columns not among features: {stray}")
        overlap = [d for d in self.dropped if d in names]
        if overlap:
            raise SchemaError(f"columns both retained and dropped: {overlap}")

    def columns(self) -> list[ColumnSchema]:
        cols = [
            ColumnSchema(f, FEATURE_BINARY if f in self.binary_features else FEATURE_NUMERIC)
            for f in self.features
        ]
        cols.append(ColumnSchema(self.target, TARGET))
        cols.extend(ColumnSchema(d, DROPPED) for d in self.dropped)
        return cols

    @classmethod
    def from_dict(cls, d: dict) -> "SchemaConfig":
        kw = {}
        for key in ("features", "target", "binary_features", "dropped"):
            if key in d:
                kw[key] = d[key]
        if "features" in kw and "binary_features" not in kw:
            kw["binary_features"] = tuple(b for b in DEFAULT_BINARY if b in kw["features"])
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "target": self.target,
            "binary_features": list(self.binary_features),
            "dropped": list(self.dropped),
        }

    @classmethod
    def for_features(cls, names: Sequence[str], target: str = DEFAULT_TARGET, binary=()) -> "SchemaConfig":
        return cls(features=tuple(names), target=target, binary_features=tuple(binary), dropped=())


@dataclass(frozen=True, eq=False)
class ReefDataset:
    """Feature matrix plus target, both read-only.

    ``removed_rows`` counts rows discarded during ingestion because a retained
    column was missing or unparseable.
    """

    schema: SchemaConfig
    X: np.ndarray
    y: np.ndarray
    removed_rows: int = 0

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=np.float64, copy=True)
        y = np.array(self.y, dtype=np.float64, copy=True)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError(f"inconsistent shapes X{X.shape} y{y.shape}")
        if X.shape[1] != len(self.schema.features):
            raise ValueError(f"{X.shape[1]} feature columns but schema names {len(self.schema.features)}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.schema.features

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n_rows

    def take(self, idx) -> "ReefDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return ReefDataset(self.schema, self.X[idx], self.y[idx])

    def with_features(self, X: np.ndarray) -> "ReefDataset":
        return ReefDataset(self.schema, X, self.y, self.removed_rows)


def _parse_cell(raw: str, binary: bool) -> float | None:
    s = raw.strip()
    if not s:
        return None
    if binary:
        return _BINARY_TOKENS.get(s.lower())
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def ingest_csv(path, schema: SchemaConfig | None = None) -> ReefDataset:
    """Read a UTF-8 CSV whose header names the schema columns.

    Rows with a missing or unparseable value in any retained column are
    dropped and counted in ``removed_rows``. ``Day``/``Night`` (or 1/0) in
    binary columns encode to 1.0/0.0.
    """
    schema = schema or SchemaConfig()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected a header row") from None
        wanted = list(schema.features) + [schema.target]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise SchemaError(f"{path}: header is missing schema columns {missing}")
        pos = [header.index(c) for c in wanted]
        is_binary = [c in schema.binary_features for c in wanted]
        rows, removed = [], 0
        for record in reader:
            if not record or all(not c.strip() for c in record):
                continue
            vals = []
            for p, b in zip(pos, is_binary):
                v = _parse_cell(record[p], b) if p < len(record) else None
                if v is None:
                    break
                vals.append(v)
            if len(vals) != len(wanted):
                removed += 1
                continue
            rows.append(vals)
    if not rows:
        raise EmptyDatasetError(f"{path}: no usable rows ({removed} removed)")
    arr = np.asarray(rows, dtype=np.float64)
    return ReefDataset(schema, arr[:, :-1], arr[:, -1], removed_rows=removed)


def export_csv(data: ReefDataset, path) -> None:
    """Write ``data`` in the ingestible CSV layout (features then target)."""
    binary = [name in data.schema.binary_features for name in data.feature_names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(data.feature_names) + [data.schema.target])
        for xrow, yv in zip(data.X.tolist(), data.y.tolist()):
            cells = [("Day" if v == 1.0 else "Night") if b else repr(v) for v, b in zip(xrow, binary)]
            w.writerow(cells + [repr(yv)])


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.6
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction <= 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1], got {self.train_fraction}")


def split_indices(n: int, cfg: SplitConfig) -> tuple[np.ndarray, np.ndarray]:
    order = list(range(n))
    SplitMix64(cfg.seed).shuffle(order)
    # the 1e-9 guard keeps e.g. 505 * 0.6 at 303 despite binary rounding
    n_train = min(n, math.floor(n * cfg.train_fraction + 1e-9))
    return np.asarray(order[:n_train], dtype=np.intp), np.asarray(order[n_train:], dtype=np.intp)


def split(data: ReefDataset, cfg: SplitConfig) -> tuple[ReefDataset, ReefDataset]:
    """Seeded Fisher-Yates shuffle, then the first ``floor(n * fraction)`` rows train."""
    if data.n_rows == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    tr, te = split_indices(data.n_rows, cfg)
    return data.take(tr), data.take(te)


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    # columns whose std falls below this map to zero
    GUARD = 1e-12

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.mean.shape[0]:
            raise ValueError(f"standardizer fitted on {self.mean.shape[0]} features, got {X.shape[-1]}")
        ok = self.std >= self.GUARD
        safe = np.where(ok, self.std, 1.0)
        return np.where(ok, (X - self.mean) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


def fit_standardizer(train: ReefDataset) -> Standardizer:
    """Per-feature mean and population standard deviation of the training rows."""
    if train.n_rows == 0:
        raise EmptyDatasetError("cannot fit a standardizer on zero rows")
    return Standardizer(train.X.mean(axis=0), train.X.std(axis=0))


def apply_standardizer(s: Standardizer, data: ReefDataset) -> ReefDataset:
    return data.with_features(s.transform(data.X))


def generate_synthetic(
    n: int,
    p: int,
    weights,
    intercept: float,
    noise_sd: float,
    seed: int,
    *,
    feature_names: Sequence[str] | None = None,
    target: str = DEFAULT_TARGET,
    binary: Sequence[int] = (),
) -> ReefDataset:
    """Uniform[-1, 1] features and ``intercept + w.x + N(0, noise_sd^2)`` targets.

    Per row the stream is consumed as ``p`` uniforms then one Gaussian. Columns
    listed in ``binary`` are thresholded to ``1.0 if u > 0 else 0.0``.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (p,):
        raise ValueError(f"need {p} weights, got {w.shape[0] if w.ndim else 'scalar'}")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    rng = SplitMix64(seed)
    X = np.empty((n, p))
    noise = np.empty(n)
    for i in range(n):
        for j in range(p):
            X[i, j] = rng.uniform(-1.0, 1.0)
        noise[i] = rng.gauss()
    for j in binary:
        X[:, j] = (X[:, j] > 0).astype(np.float64)
    y = intercept + X @ w + noise_sd * noise
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{j}" for j in range(p))
    bin_names = tuple(names[j] for j in binary)
    return ReefDataset(SchemaConfig.for_features(names, target, bin_names), X, y)


# fixed generating weights for the 18-feature synthetic reef analog
SYNTHETIC_WEIGHTS = (
    6.0, -4.0, 3.5, -1.0, 2.0, 0.5,
    -3.0, 4.5, 2.5, -2.0, 1.5, 1.0,
    -0.5, 3.0, 2.0, 5.0, 4.0, -6.0,
)
SYNTHETIC_INTERCEPT = 5.0


def calibrated_noise_sd(weights, r2: float, binary: Sequence[int] = ()) -> float:
    """Noise level giving ``Var(signal) / (Var(signal) + sd^2) == r2``.

    Uniform[-1, 1] columns have variance 1/3, binary (fair coin) columns 1/4.
    """
    w = np.asarray(weights, dtype=np.float64)
    var = np.full(w.shape, 1.0 / 3.0)
    var[list(binary)] = 0.25
    signal = float(np.sum(w**2 * var))
    return math.sqrt(signal * (1.0 / r2 - 1.0))


def synthetic_reef(n: int = 505, seed: int = 0, r2: float = 0.91, *, binary_day_night: bool = True) -> ReefDataset:
    """Schema-compatible stand-in for the tank dataset (default 18 features)."""
    binary = (DEFAULT_FEATURES.index("Day_Night"),) if binary_day_night else ()
    sd = calibrated_noise_sd(SYNTHETIC_WEIGHTS, r2, binary)
    data = generate_synthetic(
        n, len(DEFAULT_FEATURES), SYNTHETIC_WEIGHTS, SYNTHETIC_INTERCEPT, sd, seed,
        feature_names=DEFAULT_FEATURES, binary=binary,
    )
    schema = SchemaConfig(binary_features=DEFAULT_BINARY if binary_day_night else ())
    return ReefDataset(schema, data.X, data.y)


def load_schema_config(path) -> SchemaConfig:
    return SchemaConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
