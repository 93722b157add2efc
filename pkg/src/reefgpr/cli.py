"""Command-line pipeline: ingest, split, standardize, train, evaluate, report."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .dataset import (
    SchemaConfig,
    SplitConfig,
    _parse_cell,
    apply_standardizer,
    export_csv,
    fit_standardizer,
    ingest_csv,
    split,
    synthetic_reef,
)
from .metrics import evaluate_all, mse
from .models.base import Regressor
from .models.ensemble import EnsembleModel, fit_ensemble
from .models.linear import RidgeConfig, fit_ridge
from .models.registry import ModelSpec, default_roster, fit_model
from .models.svr import SvrModel
from .persist import StandardizedModel, dumps, feature_names_of, load_model, save_ensemble, save_model
from .rng import MASK64, derive_seed

log = logging.getLogger("reefgpr")

ENSEMBLE_NAME = "Bagging Ensemble"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    data: str | None = None
    out: str | None = None
    seed: int = 0
    schema: SchemaConfig = field(default_factory=SchemaConfig)
    train_fraction: float = 0.6
    standardize: bool = True
    roster: list[ModelSpec] = field(default_factory=default_roster)
    ensemble: bool = True
    ensemble_bootstrap: bool = False
    ridge_grid: list[float] | None = None

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "RunConfig":
        cfg = cls()
        if "schema_file" in d:
            p = Path(d["schema_file"])
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            cfg.schema = SchemaConfig.from_dict(json.loads(p.read_text(encoding="utf-8")))
        elif "schema" in d:
            cfg.schema = SchemaConfig.from_dict(d["schema"])
        for key in ("data", "out"):
            if key in d:
                setattr(cfg, key, d[key])
        cfg.seed = int(d.get("seed", cfg.seed))
        cfg.train_fraction = float(d.get("train_fraction", cfg.train_fraction))
        cfg.standardize = bool(d.get("standardize", cfg.standardize))
        if "roster" in d:
            cfg.roster = [ModelSpec.from_dict(m) for m in d["roster"]]
        ens = d.get("ensemble", {})
        cfg.ensemble = bool(ens.get("enabled", True))
        cfg.ensemble_bootstrap = bool(ens.get("bootstrap", False))
        if d.get("ridge_lambda_grid"):
            cfg.ridge_grid = [float(v) for v in d["ridge_lambda_grid"]]
        return cfg

    def validate(self) -> None:
        if not self.roster:
            raise ValueError("model roster is empty")
        names = [m.name for m in self.roster] + ([ENSEMBLE_NAME] if self.ensemble else [])
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate model names: {names}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        SplitConfig(self.train_fraction, 0)

    def to_dict(self) -> dict:
        return {
            "data": self.data,
            "seed": self.seed,
            "schema": self.schema.to_dict(),
            "train_fraction": self.train_fraction,
            "standardize": self.standardize,
            "roster": [m.to_dict() for m in self.roster],
            "ensemble": {"enabled": self.ensemble, "bootstrap": self.ensemble_bootstrap},
            "ridge_lambda_grid": self.ridge_grid,
        }


def slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _load_config(path: str | None) -> RunConfig:
    if not path:
        return RunConfig()
    p = Path(path)
    return RunConfig.from_dict(json.loads(p.read_text(encoding="utf-8")), base_dir=p.parent)


def _select_ridge_lambda(train, grid: list[float], seed: int) -> tuple[float, list[dict]]:
    """Pick the grid value with the lowest MSE on an 80/20 split of the training rows."""
    inner, valid = split(train, SplitConfig(0.8, seed))
    scores = []
    for lam in grid:
        m = fit_ridge(inner, RidgeConfig(lam))
        scores.append({"lambda": lam, "validation_mse": mse(valid.y, m.predict(valid.X))})
    best = min(scores, key=lambda s: (s["validation_mse"], s["lambda"]))
    return best["lambda"], scores


def _model_summary(model: Regressor) -> dict:
    inner = model.inner if isinstance(model, StandardizedModel) else model
    if isinstance(inner, SvrModel):
        return {
            "gamma": inner.kernel.gamma,
            "support_vectors": int(inner.coefficients.shape[0]),
            "converged": inner.converged,
            "smo_iterations": inner.n_iter,
        }
    return {}


def run_train(cfg: RunConfig) -> dict:
    """Run the whole training pipeline and write every artifact under ``cfg.out``.

    Returns the run manifest. Raises :class:`StageError` naming the failed
    stage; the manifest is written either way.
    """
    out = Path(cfg.out or "reefgpr_out")
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "status": "running",
        "failed_stage": None,
        "config": None,
        "seeds": {},
        "kernel_backend": _kernels.BACKEND,
        "files": [],
    }
    stage = "config"

    def write(rel: str, text: str) -> None:
        p = out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        manifest["files"].append(rel)

    try:
        cfg.validate()
        if not cfg.data:
            raise ValueError("no data file given (--data or config 'data')")
        manifest["config"] = cfg.to_dict()

        stage = "ingest"
        data = ingest_csv(cfg.data, cfg.schema)
        manifest["data"] = {"rows": data.n_rows, "removed_rows": data.removed_rows, "features": data.n_features}

        stage = "split"
        split_seed = derive_seed(cfg.seed, "split")
        manifest["seeds"]["split"] = str(split_seed)
        train_raw, test_raw = split(data, SplitConfig(cfg.train_fraction, split_seed))
        if test_raw.n_rows == 0:
            raise ValueError("test split is empty; lower train_fraction")
        manifest["split"] = {"train_fraction": cfg.train_fraction, "n_train": train_raw.n_rows,
                             "n_test": test_raw.n_rows}
        export_csv(train_raw, out / "train_split.csv")
        export_csv(test_raw, out / "test_split.csv")
        manifest["files"] += ["train_split.csv", "test_split.csv"]

        stage = "standardize"
        std = fit_standardizer(train_raw) if cfg.standardize else None
        train = apply_standardizer(std, train_raw) if std else train_raw

        roster = list(cfg.roster)
        if cfg.ridge_grid:
            stage = "ridge-grid"
            lam, scores = _select_ridge_lambda(train, cfg.ridge_grid, derive_seed(cfg.seed, "ridge-grid"))
            manifest["ridge_grid"] = {"scores": scores, "selected": lam}
            roster = [ModelSpec(m.name, m.kind, {**m.params, "lambda": lam}) if m.kind == "ridge" else m
                      for m in roster]

        fitted: list[tuple[str, Regressor]] = []
        manifest["models"] = {}
        member_files = []
        for spec in roster:
            stage = f"train:{spec.name}"
            model_seed = derive_seed(cfg.seed, f"model/{spec.name}")
            manifest["seeds"][spec.name] = str(model_seed)
            m = fit_model(spec, train, seed=model_seed)
            wrapped = StandardizedModel(m, std) if std else m
            fitted.append((spec.name, wrapped))
            rel = f"models/{slug(spec.name)}.json"
            write(rel, dumps(wrapped.to_dict()))
            member_files.append(f"{slug(spec.name)}.json")
            manifest["models"][spec.name] = {"file": rel, "spec": spec.to_dict(), **_model_summary(m)}

        if cfg.ensemble:
            stage = "train:ensemble"
            if cfg.ensemble_bootstrap:
                bag_seed = derive_seed(cfg.seed, "ensemble")
                manifest["seeds"][ENSEMBLE_NAME] = str(bag_seed)
                ens = fit_ensemble(train, roster, bootstrap=True, seed=bag_seed)
                members = tuple(StandardizedModel(m, std) if std else m for m in ens.members)
                ens = EnsembleModel(members, ens.names)
                member_files = []
                for name, m in zip(ens.names, ens.members):
                    rel = f"models/ensemble_members/{slug(name)}.json"
                    write(rel, dumps(m.to_dict()))
                    member_files.append(f"ensemble_members/{slug(name)}.json")
            else:
                # members see the identical training set, so the fitted roster is reused
                ens = EnsembleModel(tuple(m for _, m in fitted), tuple(n for n, _ in fitted))
            save_ensemble(ens, member_files, out / "models" / "ensemble.json")
            manifest["files"].append("models/ensemble.json")
            manifest["models"][ENSEMBLE_NAME] = {"file": "models/ensemble.json",
                                                 "bootstrap": cfg.ensemble_bootstrap}
            fitted.append((ENSEMBLE_NAME, ens))

        stage = "evaluate"
        report = evaluate_all(fitted, test_raw, split=manifest["split"])
        write("report.txt", report.to_text())
        write("report.csv", report.to_csv())
        manifest["status"] = "ok"
    except Exception as exc:
        manifest["status"] = "failed"
        manifest["failed_stage"] = stage
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        raise StageError(stage, exc) from exc
    finally:
        (out / "run_manifest.json").write_text(dumps(manifest), encoding="utf-8")
    return manifest


def _read_rows(path, names: tuple[str, ...]) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        missing = [c for c in names if c not in header]
        if missing:
            extra = [c for c in header if c not in names]
            raise ValueError(f"input columns do not match the model: missing {missing}; extra {extra}")
        pos = [header.index(c) for c in names]
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            vals = []
            for p, c in zip(pos, names):
                raw = rec[p] if p < len(rec) else ""
                v = _parse_cell(raw, False)
                if v is None:
                    v = _parse_cell(raw, True)
                if v is None:
                    raise ValueError(f"{path}:{lineno}: cannot parse {c}={raw!r}")
                vals.append(v)
            rows.append(vals)
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))


def run_predict(model_paths: list[str], data: str, out: str | None) -> list[list[float]]:
    models = [(Path(p).stem, load_model(p)) for p in model_paths]
    columns = []
    for _, m in models:
        names = feature_names_of(m)
        if not names:
            raise ValueError("model file carries no feature names")
        X = _read_rows(data, names)
        columns.append(m.predict(X).tolist())
    header = ["prediction"] if len(models) == 1 else [f"prediction_{stem}" for stem, _ in models]
    lines = list(zip(*columns))
    fh = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in lines:
            w.writerow([repr(v) for v in row])
    finally:
        if out:
            fh.close()
    return [list(r) for r in lines]


def run_plotdata(data: str, schema: SchemaConfig, out: str) -> list[Path]:
    """One two-column CSV per retained non-binary feature: value, target."""
    ds = ingest_csv(data, schema)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for j, name in enumerate(ds.feature_names):
        if name in schema.binary_features:
            continue
        p = outdir / f"{slug(name)}.csv"
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([name, schema.target])
            for xv, yv in zip(ds.X[:, j].tolist(), ds.y.tolist()):
                w.writerow([repr(xv), repr(yv)])
        written.append(p)
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reefgpr", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train the roster, write models, report and manifest")
    t.add_argument("--config", help="run config JSON")
    t.add_argument("--data", help="input CSV (overrides config)")
    t.add_argument("--out", help="output directory (overrides config)")
    t.add_argument("--seed", type=int, help="root seed, unsigned 64-bit (overrides config)")
    t.add_argument("--ridge-grid", help="comma-separated lambdas; ridge lambda chosen on a validation split")
    t.add_argument("--no-standardize", action="store_true")

    p = sub.add_parser("predict", help="predict rows of a CSV with saved model(s)")
    p.add_argument("--model", action="append", required=True, help="model JSON or ensemble manifest")
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="predictions CSV (default stdout)")

    d = sub.add_parser("plotdata", help="export per-feature scatter data")
    d.add_argument("--config")
    d.add_argument("--data")
    d.add_argument("--out", default="plotdata")
    d.add_argument("--seed", type=int, help="accepted for symmetry; unused")

    s = sub.add_parser("synth", help="write a synthetic CSV in the default tank schema")
    s.add_argument("--out", required=True)
    s.add_argument("--rows", type=int, default=505)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--r2", type=float, default=0.91, help="theoretical R² of the generating model")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "train":
            cfg = _load_config(args.config)
            if args.data:
                cfg.data = args.data
            if args.out:
                cfg.out = args.out
            if args.seed is not None:
                cfg.seed = args.seed
            if args.ridge_grid:
                cfg.ridge_grid = [float(v) for v in args.ridge_grid.split(",")]
            if args.no_standardize:
                cfg.standardize = False
            manifest = run_train(cfg)
            print((Path(cfg.out or "reefgpr_out") / "report.txt").read_text(encoding="utf-8"), end="")
            log.info("backend: %s", manifest["kernel_backend"])
        elif args.command == "predict":
            run_predict(args.model, args.data, args.out)
        elif args.command == "plotdata":
            cfg = _load_config(args.config)
            data = args.data or cfg.data
            if not data:
                raise ValueError("no data file given")
            files = run_plotdata(data, cfg.schema, args.out)
            log.info("wrote %d files to %s", len(files), args.out)
        elif args.command == "synth":
            export_csv(synthetic_reef(args.rows, args.seed, args.r2), args.out)
    except StageError as exc:
        print(f"reefgpr: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"reefgpr {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
