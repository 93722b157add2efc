# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SMO pair updates and best-split scan.

Semantics match ``reefgpr._fallback`` exactly; see that module for the
selection rules.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

cdef double ETA_FLOOR = 1e-12
cdef double TIE_REL = 1e-10


cdef inline double _sign(double v) nogil:
    if v > 0:
        return 1.0
    if v < 0:
        return -1.0
    return 0.0


cdef inline double _phi(double t, double g, double eta, double eps, double a, double b) nogil:
    return g * t - 0.5 * eta * t * t - eps * (fabs(a + t) - fabs(a) + fabs(b - t) - fabs(b))


cdef double _pair_step(double g, double eta, double eps, double a, double b, double hi) nogil:
    cdef double pts[4]
    cdef int npts = 0, k, q
    cdef double s, e, m, c, t, v, best_t = 0.0, best_v = 0.0, tmp, cand
    pts[npts] = 0.0
    npts += 1
    if 0.0 < -a and -a < hi:
        pts[npts] = -a
        npts += 1
    if 0.0 < b and b < hi:
        pts[npts] = b
        npts += 1
    pts[npts] = hi
    npts += 1
    # insertion sort, at most four points
    for k in range(1, npts):
        tmp = pts[k]
        q = k - 1
        while q >= 0 and pts[q] > tmp:
            pts[q + 1] = pts[q]
            q -= 1
        pts[q + 1] = tmp
    for k in range(npts - 1):
        s = pts[k]
        e = pts[k + 1]
        if e <= s:
            continue
        m = 0.5 * (s + e)
        c = g - eps * (_sign(a + m) - _sign(b - m))
        t = c / eta
        if t < s:
            t = s
        elif t > e:
            t = e
        for q in range(2):
            cand = t if q == 0 else e
            v = _phi(cand, g, eta, eps, a, b)
            if v > best_v:
                best_t = cand
                best_v = v
    return best_t


def pair_step(double g, double eta, double eps, double a, double b, double hi):
    return _pair_step(g, eta, eps, a, b, hi)


cdef double _objective(const double[::1] beta, const double[::1] y, const double[::1] G, double eps, Py_ssize_t n):
    cdef double s = 0.0, l1 = 0.0
    cdef Py_ssize_t k
    for k in range(n):
        s += beta[k] * (y[k] - 0.5 * (y[k] - G[k]))
        l1 += fabs(beta[k])
    return s - eps * l1


def dual_objective(beta, y, G, double eps):
    cdef const double[::1] b = np.ascontiguousarray(beta, dtype=np.float64)
    return _objective(b, np.ascontiguousarray(y, dtype=np.float64),
                      np.ascontiguousarray(G, dtype=np.float64), eps, b.shape[0])


def smo_solve(K_in, y_in, double eps, double C, double tol, long max_iter, bint trace=False):
    cdef const double[:, ::1] K = np.ascontiguousarray(K_in, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = y.shape[0]
    beta_arr = np.zeros(n)
    G_arr = np.array(y_in, dtype=np.float64, copy=True)
    cdef double[::1] beta = beta_arr
    cdef double[::1] G = G_arr
    cdef Py_ssize_t i, j, k
    cdef long it = 0
    cdef bint converged = False
    cdef double u, d, best_u, min_d, gap, eta, score, best_score, a, b, hi, t
    history = [_objective(beta, y, G, eps, n)] if trace else []
    while it < max_iter:
        i = -1
        best_u = -INFINITY
        min_d = INFINITY
        for k in range(n):
            if beta[k] < C:
                u = G[k] - eps if beta[k] >= 0 else G[k] + eps
                if u > best_u:
                    best_u = u
                    i = k
            if beta[k] > -C:
                d = G[k] + eps if beta[k] <= 0 else G[k] - eps
                if d < min_d:
                    min_d = d
        if i < 0 or min_d == INFINITY:
            converged = True
            break
        if best_u - min_d <= tol:
            converged = True
            break
        j = -1
        best_score = -INFINITY
        for k in range(n):
            if k == i or not beta[k] > -C:
                continue
            d = G[k] + eps if beta[k] <= 0 else G[k] - eps
            gap = best_u - d
            if not gap > 0:
                continue
            eta = K[i, i] + K[k, k] - 2.0 * K[i, k]
            if not eta > ETA_FLOOR:
                eta = ETA_FLOOR
            score = gap * gap / eta
            if score > best_score:
                best_score = score
                j = k
        if j < 0:
            converged = True
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if not eta > ETA_FLOOR:
            eta = ETA_FLOOR
        a = beta[i]
        b = beta[j]
        hi = C - a
        if b + C < hi:
            hi = b + C
        t = _pair_step(G[i] - G[j], eta, eps, a, b, hi)
        it += 1
        if t > 0.0:
            beta[i] = a + t
            beta[j] = b - t
            for k in range(n):
                G[k] -= t * (K[i, k] - K[j, k])
        if trace:
            history.append(_objective(beta, y, G, eps, n))
    return beta_arr, G_arr, it, converged, history


def best_split(X_in, y_in, idx_in, features, Py_ssize_t min_leaf):
    cdef const double[:, :] X = np.asarray(X_in, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef const cnp.intp_t[::1] idx = np.ascontiguousarray(idx_in, dtype=np.intp)
    cdef Py_ssize_t n = idx.shape[0]
    if n < 2 * min_leaf or n < 2:
        return (-1, float("nan"), 0.0)
    yc_arr = np.empty(n)
    cdef double[::1] yc = yc_arr
    cdef double s = 0.0, sse = 0.0, ymin = INFINITY, ymax = -INFINITY, mean
    cdef Py_ssize_t r, k, m, f, nf = len(features)
    for r in range(n):
        yc[r] = y[idx[r]]
        s += yc[r]
        if yc[r] < ymin:
            ymin = yc[r]
        if yc[r] > ymax:
            ymax = yc[r]
    if ymax == ymin:
        return (-1, float("nan"), 0.0)
    mean = s / n
    for r in range(n):
        yc[r] = yc[r] - mean
        sse += yc[r] * yc[r]

    col_arr = np.empty(n)
    cdef double[::1] col = col_arr
    cdef double[:, ::1] vals = np.empty((nf, n))
    cdef double[:, ::1] gains = np.empty((nf, n + 1))
    cdef const cnp.intp_t[::1] order
    cdef double best = -INFINITY, cs, total, g, tie
    cdef Py_ssize_t lo = min_leaf, hi = n - min_leaf
    cdef Py_ssize_t feat
    feats = [int(q) for q in features]
    for f in range(nf):
        feat = feats[f]
        for r in range(n):
            col[r] = X[idx[r], feat]
        order = np.argsort(col_arr, kind="stable")
        total = 0.0
        for r in range(n):
            vals[f, r] = col[order[r]]
            total += yc[order[r]]
        # total recomputed in sorted order to match the cumulative sums
        cs = 0.0
        for k in range(n + 1):
            gains[f, k] = -INFINITY
        for k in range(1, hi + 1):
            cs += yc[order[k - 1]]
            if k < lo:
                continue
            if not vals[f, k - 1] < vals[f, k]:
                continue
            g = cs * cs / k + (total - cs) * (total - cs) / (n - k) - total * total / n
            gains[f, k] = g
            if g > best:
                best = g
    tie = TIE_REL * sse
    if not best > tie:
        return (-1, float("nan"), 0.0)
    cdef double a, b, thr
    for f in range(nf):
        for k in range(lo, hi + 1):
            if gains[f, k] >= best - tie:
                a = vals[f, k - 1]
                b = vals[f, k]
                thr = 0.5 * (a + b)
                if thr >= b:
                    thr = a
                return (feats[f], thr, gains[f, k])
    return (-1, float("nan"), 0.0)
