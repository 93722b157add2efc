"""Epsilon-insensitive support vector regression trained by pairwise SMO."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import _kernels
from ..dataset import ReefDataset
from .base import DimensionError, ModelError, Regressor

KERNELS = ("linear", "polynomial", "rbf")
PRUNE = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice. ``gamma=None`` means the "scale" rule, resolved at fit time."""

    kind: str = "rbf"
    degree: int = 3
    gamma: float | None = None
    coef0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {KERNELS}")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError(f"polynomial degree must be an integer >= 1, got {self.degree}")
        if self.gamma is not None and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "degree": self.degree, "gamma": self.gamma, "coef0": self.coef0}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(d["kind"], int(d.get("degree", 3)), d.get("gamma"), float(d.get("coef0", 0.0)))


def scale_gamma(X: np.ndarray) -> float:
    """``1 / (p * Var(X))`` with the variance taken over every entry."""
    var = float(np.var(X))
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def gram(k: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(A[i], B[j])``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"kernel inputs have {A.shape[1]} and {B.shape[1]} features")
    if k.kind == "linear":
        return A @ B.T
    if k.gamma is None:
        raise ModelError("kernel gamma unresolved; fit the model or set gamma")
    if k.kind == "polynomial":
        return (k.gamma * (A @ B.T) + k.coef0) ** int(k.degree)
    # direct differences keep k(x, x) == 1 exactly
    d2 = np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=-1)
    return np.exp(-k.gamma * d2)


def kernel_eval(k: KernelSpec, x, z) -> float:
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise DimensionError(f"kernel arguments differ in shape: {x.shape} vs {z.shape}")
    return float(gram(k, x[None, :], z[None, :])[0, 0])


@dataclass(frozen=True)
class SvrConfig:
    c: float = 1.0
    epsilon: float = 0.1
    kernel: KernelSpec = field(default_factory=KernelSpec)
    tol: float = 1e-3
    max_passes: int = 200

    def __post_init__(self) -> None:
        if not self.c > 0 or not self.tol > 0:
            raise ValueError("SVR needs c > 0 and tol > 0")
        if self.epsilon < 0:
            raise ValueError("SVR epsilon must be >= 0")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "epsilon": self.epsilon,
            "kernel": self.kernel.to_dict(),
            "tol": self.tol,
            "max_passes": self.max_passes,
        }


@dataclass(frozen=True, eq=False)
class SvrModel(Regressor):
    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    kernel: KernelSpec
    c: float = float("inf")
    converged: bool = True
    n_iter: int = 0
    feature_names: tuple[str, ...] = ()
    kind: str = field(default="svr")

    def __post_init__(self) -> None:
        beta = np.array(self.coefficients, dtype=np.float64, copy=True)
        sv = np.array(self.support_vectors, dtype=np.float64, copy=True)
        if sv.ndim != 2:
            sv = sv.reshape(beta.shape[0], -1)
        if sv.shape[0] != beta.shape[0]:
            raise ModelError("one coefficient per support vector required")
        for a in (sv, beta):
            a.setflags(write=False)
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "coefficients", beta)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def _predict_rows(self, X: np.ndarray) -> np.ndarray:
        if self.coefficients.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        return gram(self.kernel, X, self.support_vectors) @ self.coefficients + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kernel": self.kernel.to_dict(),
            "support_vectors": self.support_vectors.tolist(),
            "coefficients": self.coefficients.tolist(),
            "bias": self.bias,
            "n_features": self.n_features,
            "converged": self.converged,
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrModel":
        sv = np.asarray(d["support_vectors"], dtype=np.float64).reshape(len(d["coefficients"]), int(d["n_features"]))
        return cls(sv, d["coefficients"], d["bias"], KernelSpec.from_dict(d["kernel"]),
                   converged=bool(d.get("converged", True)), feature_names=tuple(d.get("feature_names", ())))


@dataclass(frozen=True, eq=False)
class SvrFit:
    """Fitted model plus the full dual solution, for diagnostics."""

    model: SvrModel
    beta: np.ndarray
    trace: list


def _bias(beta: np.ndarray, G: np.ndarray, eps: float, C: float) -> float:
    """Average ``G - eps*sign(beta)`` over margin vectors, else the KKT interval midpoint."""
    mag = np.abs(beta)
    margin = (mag > PRUNE) & (mag < C * (1.0 - 1e-9))
    if margin.any():
        return float(np.mean(G[margin] - eps * np.sign(beta[margin])))
    zero = mag <= PRUNE
    lower = np.concatenate([G[zero] - eps, G[beta <= -C * (1.0 - 1e-9)] + eps])
    upper = np.concatenate([G[zero] + eps, G[beta >= C * (1.0 - 1e-9)] - eps])
    if lower.size and upper.size:
        return 0.5 * (float(lower.max()) + float(upper.min()))
    return float(lower.max()) if lower.size else float(upper.min())


def fit_svr_full(train: ReefDataset, cfg: SvrConfig = SvrConfig(), *, trace: bool = False) -> SvrFit:
    X, y = train.X, train.y
    n = X.shape[0]
    if n < 2:
        raise ModelError("SVR needs at least two training rows")
    kernel = cfg.kernel
    if kernel.kind != "linear" and kernel.gamma is None:
        kernel = replace(kernel, gamma=scale_gamma(X))
    K = gram(kernel, X, X)
    beta, G, n_iter, converged, history = _kernels.smo_solve(
        K, y, float(cfg.epsilon), float(cfg.c), float(cfg.tol), int(cfg.max_passes) * n, trace
    )
    b = _bias(beta, G, cfg.epsilon, cfg.c)
    keep = np.abs(beta) > PRUNE
    model = SvrModel(X[keep], beta[keep], b, kernel, c=cfg.c, converged=bool(converged),
                     n_iter=int(n_iter), feature_names=train.feature_names)
    return SvrFit(model, beta, history)


def fit_svr(train: ReefDataset, cfg: SvrConfig = SvrConfig()) -> SvrModel:
    """Solve the epsilon-SVR dual with pairwise SMO.

    The iteration budget is ``max_passes * n`` pair updates. If the KKT gap
    is still above ``tol`` afterwards the model is returned with
    ``converged=False``.
    """
    return fit_svr_full(train, cfg).model


def predict_svr(model: SvrModel, features) -> float:
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise DimensionError(f"model expects {model.n_features} features, got {x.shape}")
    return model.predict_one(x)
