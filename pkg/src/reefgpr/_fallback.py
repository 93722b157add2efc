"""Pure-Python/numpy versions of the hot kernels.

These mirror ``_core.pyx`` operation for operation (same selection rules,
same summation order) so either backend can serve the models.
"""

from __future__ import annotations

import numpy as np

ETA_FLOOR = 1e-12
TIE_REL = 1e-10


def _phi(t, g, eta, eps, a, b):
    return g * t - 0.5 * eta * t * t - eps * (abs(a + t) - abs(a) + abs(b - t) - abs(b))


def _sign(v):
    return 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)


def pair_step(g, eta, eps, a, b, hi):
    """Best ``t`` in ``[0, hi]`` for the update ``beta_i += t, beta_j -= t``.

    The pair objective is concave and piecewise quadratic, with kinks where
    ``beta_i`` or ``beta_j`` crosses zero. Each piece is maximized exactly.
    """
    pts = [0.0]
    if 0.0 < -a < hi:
        pts.append(-a)
    if 0.0 < b < hi:
        pts.append(b)
    pts.append(hi)
    pts.sort()
    best_t, best_v = 0.0, 0.0
    for k in range(len(pts) - 1):
        s, e = pts[k], pts[k + 1]
        if e <= s:
            continue
        m = 0.5 * (s + e)
        c = g - eps * (_sign(a + m) - _sign(b - m))
        t = c / eta
        if t < s:
            t = s
        elif t > e:
            t = e
        for cand in (t, e):
            v = _phi(cand, g, eta, eps, a, b)
            if v > best_v:
                best_t, best_v = cand, v
    return best_t


def dual_objective(beta, y, G, eps):
    f = y - G
    return float(np.sum(beta * (y - 0.5 * f)) - eps * np.sum(np.abs(beta)))


def smo_solve(K, y, eps, C, tol, max_iter, trace=False):
    """Maximize ``-1/2 b'Kb - eps|b|_1 + y'b`` s.t. ``sum(b) = 0, |b_k| <= C``.

    Returns ``(beta, G, n_iter, converged, trace)`` where ``G = y - K beta``.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    beta = np.zeros(n)
    G = y.copy()
    diag = np.diagonal(K).copy()
    history = [dual_objective(beta, y, G, eps)] if trace else []
    converged = False
    it = 0
    while it < max_iter:
        up = np.where(beta >= 0, G - eps, G + eps)
        down = np.where(beta <= 0, G + eps, G - eps)
        up_ok = beta < C
        down_ok = beta > -C
        if not up_ok.any() or not down_ok.any():
            converged = True
            break
        U = np.where(up_ok, up, -np.inf)
        D = np.where(down_ok, down, np.inf)
        i = int(np.argmax(U))
        if U[i] - D.min() <= tol:
            converged = True
            break
        gap = U[i] - D
        eta = diag[i] + diag - 2.0 * K[i]
        eta = np.where(eta > ETA_FLOOR, eta, ETA_FLOOR)
        cand = down_ok & (gap > 0)
        cand[i] = False
        score = np.where(cand, gap * gap / eta, -np.inf)
        j = int(np.argmax(score))
        if not np.isfinite(score[j]):
            converged = True
            break
        a, b = beta[i], beta[j]
        hi = min(C - a, b + C)
        t = pair_step(G[i] - G[j], eta[j], eps, a, b, hi)
        it += 1
        if t > 0.0:
            beta[i] = a + t
            beta[j] = b - t
            G -= t * (K[i] - K[j])
        if trace:
            history.append(dual_objective(beta, y, G, eps))
    return beta, G, it, converged, history


def best_split(X, y, idx, features, min_leaf):
    """Maximal SSE-reduction split of rows ``idx`` over ``features``.

    Candidates are midpoints between consecutive distinct sorted values,
    with both sides holding at least ``min_leaf`` rows. Among candidates whose
    gain is within ``TIE_REL * SSE(parent)`` of the best, the earliest in
    (feature order, ascending threshold) wins. Returns ``(-1, nan, 0.0)`` when
    no candidate strictly reduces SSE.
    """
    idx = np.asarray(idx, dtype=np.intp)
    n = idx.shape[0]
    none = (-1, float("nan"), 0.0)
    if n < 2 * min_leaf or n < 2:
        return none
    yn = y[idx]
    if yn.max() == yn.min():
        return none
    mean = np.cumsum(yn)[-1] / n
    yc = yn - mean
    sse = float(np.cumsum(yc * yc)[-1])
    lo, hi = min_leaf, n - min_leaf
    results = []
    best = -np.inf
    for f in features:
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        v = col[order]
        cs = np.cumsum(yc[order])
        total = cs[-1]
        k = np.arange(lo, hi + 1)
        if k.size == 0:
            continue
        valid = v[k - 1] < v[k]
        if not valid.any():
            continue
        sl = cs[k - 1]
        gains = sl * sl / k + (total - sl) * (total - sl) / (n - k) - total * total / n
        gains = np.where(valid, gains, -np.inf)
        results.append((f, k, v, gains))
        best = max(best, float(gains.max()))
    tie = TIE_REL * sse
    if not best > tie:
        return none
    for f, k, v, gains in results:
        hit = np.nonzero(gains >= best - tie)[0]
        if hit.size:
            m = k[hit[0]]
            a, b = float(v[m - 1]), float(v[m])
            thr = 0.5 * (a + b)
            if thr >= b:
                thr = a
            return int(f), thr, float(gains[hit[0]])
    return none
