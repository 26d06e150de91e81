# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_kernels_py`` for the reference."""
import numpy as np

from libc.math cimport fabs, sqrt

cdef double _SAFMIN = np.finfo(float).tiny


cdef inline double _pivmin(const double[::1] e2):
    cdef Py_ssize_t k
    cdef double m = 1.0
    for k in range(e2.shape[0]):
        if e2[k] > m:
            m = e2[k]
    return _SAFMIN * m


cdef inline Py_ssize_t _count(const double[::1] d, const double[::1] e2,
                              double x, double pivmin) noexcept nogil:
    cdef Py_ssize_t k, c = 0
    cdef double t = d[0] - x
    if fabs(t) < pivmin:
        t = -pivmin
    if t <= 0:
        c += 1
    for k in range(1, d.shape[0]):
        t = d[k] - x - e2[k - 1] / t
        if fabs(t) < pivmin:
            t = -pivmin
        if t <= 0:
            c += 1
    return c


def sturm_count(d, e2, double x):
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=float)
    cdef const double[::1] ev = np.ascontiguousarray(e2, dtype=float)
    return int(_count(dv, ev, x, _pivmin(ev)))


def bisect_eigenvalues(d, e2, Py_ssize_t k0, Py_ssize_t k1, double lo, double hi,
                       double rtol, double atol, Py_ssize_t max_iter):
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=float)
    cdef const double[::1] ev = np.ascontiguousarray(e2, dtype=float)
    cdef double pivmin = _pivmin(ev)
    cdef Py_ssize_t m = k1 - k0, j, k, it, nact, c
    out = np.empty(m)
    los_a = np.full(m, lo)
    his_a = np.full(m, hi)
    cdef double[::1] los = los_a
    cdef double[::1] his = his_a
    cdef double[::1] res = out
    cdef double a, b, mid, tol
    with nogil:
        for it in range(max_iter):
            nact = 0
            for j in range(m):
                a = los[j]
                b = his[j]
                tol = rtol * (fabs(a) if fabs(a) > fabs(b) else fabs(b))
                if tol < atol:
                    tol = atol
                if b - a <= tol:
                    continue
                nact += 1
                if a > 0 and b > 2 * a:
                    mid = sqrt(a * b)
                else:
                    mid = 0.5 * (a + b)
                c = _count(dv, ev, mid, pivmin) - k0
                # every count brackets all targets, not just target j
                for k in range(m):
                    if c > k:
                        if mid < his[k]:
                            his[k] = mid
                    elif mid > los[k]:
                        los[k] = mid
            if nact == 0:
                break
        for j in range(m):
            res[j] = 0.5 * (los[j] + his[j])
    return out


def hardy_sides(head, tail, invw, Py_ssize_t i):
    cdef const double[::1] h = np.ascontiguousarray(head, dtype=float)
    cdef const double[::1] tl = np.ascontiguousarray(tail, dtype=float)
    cdef const double[::1] w = np.ascontiguousarray(invw, dtype=float)
    cdef Py_ssize_t n = h.shape[0] - 1, j
    cdef double cm = 0.0, cp = 0.0, s, comp, t, x, v
    s = 0.0
    comp = 0.0
    for j in range(i - 1, -1, -1):
        x = w[j]
        t = s + x
        if fabs(s) >= fabs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
        v = h[j] * (s + comp)
        if v > cm:
            cm = v
    s = 0.0
    comp = 0.0
    for j in range(i + 1, n + 1):
        x = w[j - 1]
        t = s + x
        if fabs(s) >= fabs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
        v = tl[j] * (s + comp)
        if v > cp:
            cp = v
    return cm, cp


def passage_ratios(p, q):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=float)
    cdef Py_ssize_t n = pv.shape[0] - 1, k
    L_a = np.empty(n + 1)
    R_a = np.empty(n + 1)
    cdef double[::1] L = L_a
    cdef double[::1] R = R_a
    L[0] = 1.0
    for k in range(1, n + 1):
        L[k] = 1.0 + L[k - 1] * qv[k] / pv[k - 1]
    R[n] = 1.0
    for k in range(n - 1, -1, -1):
        R[k] = 1.0 + R[k + 1] * pv[k] / qv[k + 1]
    return L_a, R_a


def ell_sides(p, q, L, R, Py_ssize_t i0):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=float)
    cdef const double[::1] Lv = np.ascontiguousarray(L, dtype=float)
    cdef const double[::1] Rv = np.ascontiguousarray(R, dtype=float)
    cdef Py_ssize_t n = pv.shape[0] - 1, j
    cdef double left = 0.0, right = 0.0, s
    if i0 > 0:
        s = Lv[i0 - 1] / pv[i0 - 1]
        left = s
        for j in range(i0 - 2, -1, -1):
            s = Lv[j] / pv[j] + (Lv[j] * qv[j + 1] / (pv[j] * Lv[j + 1])) * s
            if s > left:
                left = s
    if i0 < n:
        s = Rv[i0 + 1] / qv[i0 + 1]
        right = s
        for j in range(i0 + 2, n + 1):
            s = Rv[j] / qv[j] + (Rv[j] * pv[j - 1] / (qv[j] * Rv[j - 1])) * s
            if s > right:
                right = s
    return left, right
