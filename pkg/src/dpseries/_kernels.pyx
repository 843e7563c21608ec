# cython: language_level=3
"""Compiled versions of the hot kernels; see ``_kernels_py`` for semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def circular_convolve(h, x):
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t T = hv.shape[0]
    if xv.shape[0] != T:
        raise ValueError("kernel and signal lengths differ")
    out = np.zeros(T)
    cdef double[::1] y = out
    cdef Py_ssize_t t, k, j
    cdef double xk
    for k in range(T):
        xk = xv[k]
        if xk == 0.0:
            continue
        # y[t] += xk * h[(t - k) mod T], split to avoid the modulo
        j = 0
        for t in range(k, T):
            y[t] += xk * hv[j]
            j += 1
        for t in range(0, k):
            y[t] += xk * hv[j]
            j += 1
    return out


def interp_fill(idx, z, Py_ssize_t T):
    cdef const cnp.int64_t[::1] iv = np.ascontiguousarray(idx, dtype=np.int64)
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = iv.shape[0]
    if n == 0:
        raise ValueError("cannot interpolate from an empty draw")
    out = np.empty(T)
    cdef double[::1] o = out
    cdef Py_ssize_t a, t, i0, i1
    cdef double z0, z1, span
    for t in range(0, iv[0]):
        o[t] = zv[0]
    for t in range(iv[n - 1], T):
        o[t] = zv[n - 1]
    for a in range(n - 1):
        i0 = iv[a]
        i1 = iv[a + 1]
        z0 = zv[a]
        z1 = zv[a + 1]
        span = <double>(i1 - i0)
        for t in range(i0 + 1, i1):
            o[t] = z0 + ((t - i0) / span) * (z1 - z0)
    for a in range(n):
        o[iv[a]] = zv[a]
    return out


def gram_lambda_max(r, idx, double tol=1e-12, Py_ssize_t maxiter=10000):
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const cnp.int64_t[::1] iv = np.ascontiguousarray(idx, dtype=np.int64)
    cdef Py_ssize_t n = iv.shape[0]
    cdef Py_ssize_t T = rv.shape[0]
    if n == 0:
        return 0.0, 0
    Garr = np.empty((n, n))
    cdef double[:, ::1] G = Garr
    cdef Py_ssize_t a, b, it = 0
    cdef cnp.int64_t d
    cdef double lam = 0.0, new, norm
    # symmetric fill; the matvec below is left to BLAS
    for a in range(n):
        G[a, a] = rv[0]
        for b in range(a + 1, n):
            d = (iv[a] - iv[b]) % T
            if d < 0:
                d += T
            G[a, b] = rv[d]
            G[b, a] = rv[T - d] if d else rv[0]
    v = np.full(n, 1.0 / sqrt(<double>n))
    for it in range(1, maxiter + 1):
        w = Garr @ v
        new = float(v @ w)
        norm = sqrt(float(w @ w))
        if norm == 0.0:
            return 0.0, it
        v = w / norm
        if fabs(new - lam) <= tol * fabs(new):
            lam = new
            break
        lam = new
    return lam, it
