"""Small dense linear algebra: immutable containers, product, transpose, SPD solve."""

from __future__ import annotations

import math

import numpy as np

# pivots at or below PIVOT_FLOOR * max(1, max|diag|) count as loss of definiteness
PIVOT_FLOOR = 1e-12


class LinAlgError(ValueError):
    pass


class NotPositiveDefiniteError(LinAlgError):
    pass


def _frozen(arr, ndim: int, what: str) -> np.ndarray:
    a = np.array(arr, dtype=np.float64, copy=True)
    if a.ndim != ndim:
        raise LinAlgError(f"{what} must be {ndim}-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinAlgError(f"{what} contains non-finite values")
    a.setflags(write=False)
    return a


class Vector:
    """Finite real vector. Read-only; behaves as an ndarray via ``__array__``."""

    __slots__ = ("data",)

    def __init__(self, elements) -> None:
        if isinstance(elements, Vector):
            self.data = elements.data
        else:
            self.data = _frozen(elements, 1, "Vector")

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, i):
        return self.data[i]

    def __iter__(self):
        return iter(self.data.tolist())

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vector):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"Vector({self.data.tolist()!r})"

    def tolist(self) -> list[float]:
        return self.data.tolist()


class Matrix:
    """Finite real matrix stored row-major. Read-only."""

    __slots__ = ("data",)

    def __init__(self, rows) -> None:
        if isinstance(rows, Matrix):
            self.data = rows.data
        else:
            self.data = np.ascontiguousarray(_frozen(rows, 2, "Matrix"))
            self.data.setflags(write=False)

    @classmethod
    def from_flat(cls, rows: int, cols: int, elements) -> "Matrix":
        flat = list(elements)
        if rows * cols != len(flat):
            raise LinAlgError(f"{rows}x{cols} matrix needs {rows * cols} elements, got {len(flat)}")
        return cls(np.asarray(flat, dtype=np.float64).reshape(rows, cols))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(np.eye(n))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __getitem__(self, idx):
        return self.data[idx]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"Matrix({self.data.tolist()!r})"

    def tolist(self) -> list[list[float]]:
        return self.data.tolist()


def matmul(a, b) -> Matrix:
    a, b = Matrix(a), Matrix(b)
    if a.cols != b.rows:
        raise LinAlgError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    return Matrix(a.data @ b.data)


def transpose(a) -> Matrix:
    return Matrix(Matrix(a).data.T)


def cholesky(a) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Raises :class:`NotPositiveDefiniteError` when a pivot drops to
    ``PIVOT_FLOOR`` times the largest diagonal magnitude (at least 1) or
    below; the caller decides whether to add jitter.
    """
    m = Matrix(a).data
    n, k = m.shape
    if n != k:
        raise LinAlgError(f"Cholesky needs a square matrix, got {n}x{k}")
    scale = max(1.0, float(np.max(np.abs(m)))) if n else 1.0
    if n and np.max(np.abs(m - m.T)) > 1e-9 * scale:
        raise LinAlgError("matrix is not symmetric within 1e-9")
    floor = PIVOT_FLOOR * max(1.0, float(np.max(np.abs(np.diagonal(m))))) if n else PIVOT_FLOOR
    L = np.zeros((n, n))
    for j in range(n):
        pivot = m[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > floor:
            raise NotPositiveDefiniteError(
                f"non-positive pivot {pivot:.3e} at column {j}; "
                "matrix is not positive definite, add diagonal jitter and retry"
            )
        L[j, j] = math.sqrt(pivot)
        L[j + 1 :, j] = (m[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_spd(a, b) -> Vector:
    """Solve ``a @ w = b`` for symmetric positive definite ``a`` by Cholesky."""
    rhs = Vector(b).data
    L = cholesky(a)
    n = L.shape[0]
    if rhs.shape[0] != n:
        raise LinAlgError(f"right-hand side has length {rhs.shape[0]}, matrix is {n}x{n}")
    z = np.empty(n)
    for i in range(n):
        z[i] = (rhs[i] - L[i, :i] @ z[:i]) / L[i, i]
    w = np.empty(n)
    for i in range(n - 1, -1, -1):
        w[i] = (z[i] - L[i + 1 :, i] @ w[i + 1 :]) / L[i, i]
    return Vector(w)
