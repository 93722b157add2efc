"""Independent reference computations used only by the tests.

None of these import the code paths they check.
"""

from __future__ import annotations

import itertools

import numpy as np


def matmul_loops(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            s = 0.0
            for k in range(a.shape[1]):
                s += a[i, k] * b[k, j]
            out[i, j] = s
    return out


def gauss_jordan_inverse(a):
    a = np.asarray(a, float)
    n = a.shape[0]
    aug = np.hstack([a.copy(), np.eye(n)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        for r in range(n):
            if r != col:
                aug[r] -= aug[r, col] * aug[col]
    return aug[:, n:]


def ols_gradient_descent(X, y, step=1e-3, max_iter=2_000_000, gtol=1e-10):
    """Plain gradient descent on ``1/2 * sum (y - b - Xw)^2``; returns ``[b, w...]``."""
    D = np.hstack([np.ones((X.shape[0], 1)), X])
    theta = np.zeros(D.shape[1])
    for _ in range(max_iter):
        grad = D.T @ (D @ theta - y)
        theta -= step * grad
        if np.max(np.abs(grad)) < gtol:
            break
    return theta


def sse(v):
    v = np.asarray(v, float)
    return float(np.sum((v - v.mean()) ** 2)) if v.size else 0.0


def brute_force_split(X, y, min_leaf=1, tie_rel=1e-10):
    """Enumerate every (feature, midpoint) split and recompute SSEs from scratch.

    Returns ``(feature, threshold, reduction)`` or ``None``. Near-ties (within
    ``tie_rel * SSE(parent)``) resolve to the lowest feature, then threshold.
    """
    X, y = np.asarray(X, float), np.asarray(y, float)
    parent = sse(y)
    cands = []
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        for a, b in zip(vals, vals[1:]):
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            left = X[:, f] <= thr
            if left.sum() < min_leaf or (~left).sum() < min_leaf:
                continue
            cands.append((f, thr, parent - sse(y[left]) - sse(y[~left])))
    if not cands:
        return None
    best = max(c[2] for c in cands)
    tie = tie_rel * parent
    if not best > tie:
        return None
    return min((c for c in cands if c[2] >= best - tie), key=lambda c: (c[0], c[1]))


def svr_dual_objective(beta, K, y, eps):
    beta = np.asarray(beta, float)
    return -0.5 * beta @ K @ beta - eps * np.abs(beta).sum() + y @ beta


def svr_dual_grid_search(K, y, eps, C, step, refine=6):
    """Maximize the epsilon-SVR dual over a lattice, then shrink the lattice around the best point.

    The last coordinate is fixed by ``sum(beta) = 0``; infeasible points are dropped.
    """
    n = len(y)
    axis = np.arange(-C, C + 1e-12, step)
    best_val, best = -np.inf, None
    chunk = []

    def flush():
        nonlocal best_val, best
        if not chunk:
            return
        B = np.array(chunk)
        last = -B.sum(axis=1)
        ok = np.abs(last) <= C + 1e-12
        B = np.hstack([B[ok], last[ok, None]])
        if B.size:
            vals = -0.5 * np.einsum("ij,jk,ik->i", B, K, B) - eps * np.abs(B).sum(1) + B @ y
            k = int(np.argmax(vals))
            if vals[k] > best_val:
                best_val, best = float(vals[k]), B[k].copy()
        chunk.clear()

    for pt in itertools.product(axis, repeat=n - 1):
        chunk.append(pt)
        if len(chunk) >= 200_000:
            flush()
    flush()

    h = step
    for _ in range(refine):
        h /= 2.0
        improved = True
        while improved:
            improved = False
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    cand = best.copy()
                    cand[i] += h
                    cand[j] -= h
                    if np.max(np.abs(cand)) > C + 1e-12:
                        continue
                    v = svr_dual_objective(cand, K, y, eps)
                    if v > best_val + 1e-15:
                        best_val, best, improved = v, cand, True
    return best_val, best
