# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled gauge kernels; same contract as ``nalab._kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef double _TIE = 1e-12


cdef struct keyed:
    double key
    Py_ssize_t idx


cdef int _cmp_desc(const void* pa, const void* pb) noexcept nogil:
    cdef keyed* a = <keyed*>pa
    cdef keyed* b = <keyed*>pb
    if a.key > b.key:
        return -1
    if a.key < b.key:
        return 1
    if a.idx < b.idx:
        return -1
    if a.idx > b.idx:
        return 1
    return 0


cdef inline double _sign(double v) noexcept nogil:
    if v > 0:
        return 1.0
    if v < 0:
        return -1.0
    return 0.0


cdef double _phi_eval(const double* y, const double* phi, const double* a,
                      Py_ssize_t n, double r, double* f, double* upper) noexcept nogil:
    """Fill ``f`` with the normalised candidate for ``r``; return its value."""
    cdef Py_ssize_t i
    cdef double u, mx = 0.0, s2 = 0.0, dual, value = 0.0, nr, b, bsum = 0.0
    for i in range(n):
        u = r * a[i] if a[i] > 0.0 else 0.0
        if u > 1.0:
            u = 1.0
        f[i] = _sign(y[i]) * u
        if u > mx:
            mx = u
        s2 += phi[i] * phi[i] * u * u
    dual = mx + sqrt(s2)
    for i in range(n):
        f[i] /= dual
        value += f[i] * y[i]
    nr = 0.0
    for i in range(n):
        nr += phi[i] * phi[i] * f[i] * f[i]
    nr = sqrt(nr)
    for i in range(n):
        b = y[i] / value - phi[i] * (phi[i] * f[i] / nr)
        bsum += fabs(b)
    if bsum < 1.0:
        bsum = 1.0
    upper[0] = value * bsum
    return value


cdef double _phi_core(const double* y, const double* phi, Py_ssize_t n,
                      double* f, double* upper, double* work) noexcept nogil:
    """Exact gauge; ``work`` must hold 9*n doubles.  Returns the value."""
    cdef Py_ssize_t i, k, K = 0, m = 0, best_i
    cdef double* a = work
    cdef double* X = work + n
    cdef double* S = work + 2 * n
    cdef double* Q = work + 3 * n
    cdef double* rs = work + 4 * n
    cdef double* vals = work + 6 * n
    cdef double* ftmp = work + 8 * n
    cdef keyed* keys = <keyed*>malloc(n * sizeof(keyed))
    cdef double ay, lo, hi, qa, qc, r, best, value, up, best_gap
    cdef double Xk, Sk, Qk, acc

    for i in range(n):
        ay = fabs(y[i])
        if ay > 0:
            a[i] = ay / (phi[i] * phi[i])
            keys[K].key = a[i]
            keys[K].idx = i
            K += 1
        else:
            a[i] = 0.0
    if K == 0:
        free(keys)
        for i in range(n):
            f[i] = 0.0
        upper[0] = 0.0
        return 0.0
    qsort(keys, K, sizeof(keyed), _cmp_desc)

    acc = 0.0
    for k in range(K):
        acc += fabs(y[keys[k].idx])
        X[k] = acc
    acc = 0.0
    for k in range(K):
        i = keys[k].idx
        acc += phi[i] * phi[i]
        S[k] = acc
    acc = 0.0
    for k in range(K - 1, -1, -1):
        Q[k] = acc
        i = keys[k].idx
        acc += fabs(y[i]) * a[i]

    for k in range(K):
        lo = 1.0 / keys[k].key
        if k + 1 < K:
            hi = 1.0 / keys[k + 1].key
        else:
            hi = INFINITY
        Xk = X[k]
        Sk = S[k]
        Qk = Q[k]
        rs[m] = lo
        if Qk > 0.0:
            vals[m] = (Xk + lo * Qk) / (1.0 + sqrt(Sk + lo * (lo * Qk)))
        else:
            # saturated piece; also keeps lo = inf (subnormal y) out of 0*inf
            vals[m] = Xk / (1.0 + sqrt(Sk))
        m += 1
        qa = Xk * Xk - Qk
        if Qk > 0.0 and qa > 0.0:
            qc = Sk * Sk - Sk
            acc = Xk * Xk * Sk * Sk - qa * qc
            if acc < 0.0:
                acc = 0.0
            r = (Xk * Sk + sqrt(acc)) / qa
            if lo < r and r < hi:
                rs[m] = r
                vals[m] = (Xk + r * Qk) / (1.0 + sqrt(Sk + r * (r * Qk)))
                m += 1
    free(keys)

    best = vals[0]
    for i in range(1, m):
        if vals[i] > best:
            best = vals[i]
    best_i = -1
    best_gap = INFINITY
    value = 0.0
    for i in range(m):
        if vals[i] >= best * (1.0 - _TIE):
            acc = _phi_eval(y, phi, a, n, rs[i], ftmp, &up)
            if best_i < 0 or up - acc < best_gap:
                best_i = i
                best_gap = up - acc
                value = acc
                upper[0] = up
                for k in range(n):
                    f[k] = ftmp[k]
    return value


cdef double _box_core(const double* x, const double* d, Py_ssize_t n,
                      double* f, double* upper, double* work) noexcept nogil:
    """Exact gauge of the box-plus-ellipsoid ball; ``work`` holds 3*n doubles."""
    cdef Py_ssize_t i, k, K = 0
    cdef double* W = work
    cdef double* T = work + n
    cdef double* U = work + 2 * n
    cdef keyed* keys = <keyed*>malloc(n * sizeof(keyed))
    cdef double ax, w, tk, F, lam, acc, dual, value, nr, s, smax
    cdef double sw = 0.0, st = 0.0, su = 0.0, l1 = 0.0, l2 = 0.0

    for i in range(n):
        ax = fabs(x[i])
        if ax > 0:
            keys[K].key = ax
            keys[K].idx = i
            K += 1
    if K == 0:
        free(keys)
        for i in range(n):
            f[i] = 0.0
        upper[0] = 0.0
        return 0.0
    qsort(keys, K, sizeof(keyed), _cmp_desc)
    for k in range(K):
        i = keys[k].idx
        w = 1.0 / (d[i] * d[i])
        sw += w
        st += w * keys[k].key
        su += w * keys[k].key * keys[k].key
        W[k] = sw
        T[k] = st
        U[k] = su
    k = 1
    while k < K:
        tk = keys[k].key
        F = U[k - 1] - 2.0 * tk * T[k - 1] + tk * tk * (W[k - 1] - 1.0)
        if F >= 0.0:
            break
        k += 1
    free(keys)
    acc = T[k - 1] * T[k - 1] - (W[k - 1] - 1.0) * U[k - 1]
    if acc < 0.0:
        acc = 0.0
    lam = U[k - 1] / (T[k - 1] + sqrt(acc))

    for i in range(n):
        ax = fabs(x[i]) - lam
        if ax > 0.0:
            f[i] = _sign(x[i]) * ax / (d[i] * d[i])
        else:
            f[i] = 0.0
        l1 += fabs(f[i])
        l2 += d[i] * d[i] * f[i] * f[i]
    if l1 == 0.0:
        # lam rounded up to max|x| (tiny d): norm with the largest coordinate
        k = 0
        for i in range(n):
            if fabs(x[i]) > fabs(x[k]):
                k = i
        f[k] = _sign(x[k])
        l1 = 1.0
        l2 = d[k] * d[k]
    dual = l1 + sqrt(l2)
    value = 0.0
    for i in range(n):
        f[i] /= dual
        value += f[i] * x[i]
    nr = sqrt(l2) / dual
    smax = 1.0
    for i in range(n):
        s = fabs(x[i] / value - d[i] * (d[i] * f[i] / nr))
        if s > smax:
            smax = s
    upper[0] = value * smax
    return value


def _row_scales(Y):
    s = np.abs(Y).max(axis=1)
    return np.where(s > 0, s, 1.0)


def phi_gauge(y, phi):
    # unit sup norm keeps every square in range
    y = np.asarray(y, dtype=np.float64)
    cdef double s = np.abs(y).max() if y.size else 0.0
    if s == 0:
        return 0.0, np.zeros(y.shape[0]), 0.0
    cdef cnp.ndarray[double, ndim=1] yy = np.ascontiguousarray(y / s, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pp = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t n = yy.shape[0]
    cdef cnp.ndarray[double, ndim=1] f = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] work = np.empty(9 * n + 1)
    cdef double up = 0.0, value
    value = _phi_core(&yy[0], &pp[0], n, &f[0], &up, &work[0])
    return value * s, f, up * s


def box_gauge(x, d):
    x = np.asarray(x, dtype=np.float64)
    cdef double s = np.abs(x).max() if x.size else 0.0
    if s == 0:
        return 0.0, np.zeros(x.shape[0]), 0.0
    cdef cnp.ndarray[double, ndim=1] xx = np.ascontiguousarray(x / s, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0]
    cdef cnp.ndarray[double, ndim=1] f = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] work = np.empty(3 * n + 1)
    cdef double up = 0.0, value
    value = _box_core(&xx[0], &dd[0], n, &f[0], &up, &work[0])
    return value * s, f, up * s


def phi_gauge_many(Y, phi):
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    scales = _row_scales(Y)
    cdef cnp.ndarray[double, ndim=2] YY = np.ascontiguousarray(Y / scales[:, None])
    cdef cnp.ndarray[double, ndim=1] pp = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t rows = YY.shape[0], n = YY.shape[1], j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(rows)
    cdef cnp.ndarray[double, ndim=1] f = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] work = np.empty(9 * n + 1)
    cdef double up
    with nogil:
        for j in range(rows):
            out[j] = _phi_core(&YY[j, 0], &pp[0], n, &f[0], &up, &work[0])
    return out * scales


def box_gauge_many(X, d):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    scales = _row_scales(X)
    cdef cnp.ndarray[double, ndim=2] XX = np.ascontiguousarray(X / scales[:, None])
    cdef cnp.ndarray[double, ndim=1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t rows = XX.shape[0], n = XX.shape[1], j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(rows)
    cdef cnp.ndarray[double, ndim=1] f = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] work = np.empty(3 * n + 1)
    cdef double up
    with nogil:
        for j in range(rows):
            out[j] = _box_core(&XX[j, 0], &dd[0], n, &f[0], &up, &work[0])
    return out * scales
