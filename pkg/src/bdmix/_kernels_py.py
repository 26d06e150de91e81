"""Pure-Python/numpy versions of the hot loops.

Signatures and results match the compiled ``_kernels`` module; this one is
used when the extension is not built or ``BDMIX_PURE_PYTHON`` is set.
"""

import numpy as np

_SAFMIN = np.finfo(float).tiny


def _pivmin(e2):
    return _SAFMIN * max(1.0, float(np.max(e2))) if len(e2) else _SAFMIN


def sturm_count(d, e2, x):
    """Number of eigenvalues of the symmetric tridiagonal ``(d, sqrt(e2))`` below ``x``."""
    d = np.asarray(d, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    pivmin = _pivmin(e2)
    count = 0
    t = d[0] - x
    if abs(t) < pivmin:
        t = -pivmin
    if t <= 0:
        count += 1
    for k in range(1, d.size):
        t = d[k] - x - e2[k - 1] / t
        if abs(t) < pivmin:
            t = -pivmin
        if t <= 0:
            count += 1
    return count


def _counts(d, e2, xs, pivmin):
    # Sturm counts at many shifts at once; the loop runs over positions
    t = d[0] - xs
    t[np.abs(t) < pivmin] = -pivmin
    count = (t <= 0).astype(np.int64)
    for k in range(1, d.size):
        t = d[k] - xs - e2[k - 1] / t
        t[np.abs(t) < pivmin] = -pivmin
        count += t <= 0
    return count


def bisect_eigenvalues(d, e2, k0, k1, lo, hi, rtol, atol, max_iter):
    """Eigenvalues with ascending indices ``k0 <= k < k1`` by Sturm bisection.

    All targets start from the bracket ``[lo, hi]`` and are refined in
    lockstep.  When ``lo > 0`` midpoints are geometric while the bracket
    spans more than a factor of two, which gives full relative accuracy for
    tiny eigenvalues in a bounded number of steps.
    """
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(e2, dtype=float)
    pivmin = _pivmin(e2)
    m = k1 - k0
    los = np.full(m, float(lo))
    his = np.full(m, float(hi))
    target = np.arange(k0, k1)
    active = np.ones(m, dtype=bool)
    for _ in range(max_iter):
        width = his - los
        tol = np.maximum(atol, rtol * np.maximum(np.abs(los), np.abs(his)))
        active &= width > tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        a, b = los[idx], his[idx]
        geo = (a > 0) & (b > 2 * a)
        mid = np.where(geo, np.sqrt(np.where(geo, a * b, 0.0)), 0.5 * (a + b))
        c = _counts(d, e2, mid.copy(), pivmin)
        # every count brackets all targets, not just the one it was taken for
        above = c[None, :] > target[:, None]
        his = np.minimum(his, np.where(above, mid[None, :], np.inf).min(axis=1))
        los = np.maximum(los, np.where(above, -np.inf, mid[None, :]).max(axis=1))
    return 0.5 * (los + his)


def _neumaier_add(s, comp, x):
    t = s + x
    if abs(s) >= abs(x):
        comp += (s - t) + x
    else:
        comp += (x - t) + s
    return t, comp


def hardy_sides(head, tail, invw, i):
    """Return ``(C_minus, C_plus)`` at state ``i``.

    ``head[j]`` and ``tail[j]`` are the masses of ``[0, j]`` and ``[j, n]``;
    ``invw[k]`` is the inverse weight of edge ``(k, k+1)``.
    """
    n = len(head) - 1
    cm = 0.0
    s = comp = 0.0
    for j in range(i - 1, -1, -1):
        s, comp = _neumaier_add(s, comp, invw[j])
        cm = max(cm, head[j] * (s + comp))
    cp = 0.0
    s = comp = 0.0
    for j in range(i + 1, n + 1):
        s, comp = _neumaier_add(s, comp, invw[j - 1])
        cp = max(cp, tail[j] * (s + comp))
    return cm, cp


def passage_ratios(p, q):
    """Return ``(L, R)`` with ``L[k] = pi([0,k])/pi(k)`` and ``R[k] = pi([k,n])/pi(k)``."""
    n = len(p) - 1
    L = np.empty(n + 1)
    R = np.empty(n + 1)
    L[0] = 1.0
    for k in range(1, n + 1):
        L[k] = 1.0 + L[k - 1] * q[k] / p[k - 1]
    R[n] = 1.0
    for k in range(n - 1, -1, -1):
        R[k] = 1.0 + R[k + 1] * p[k] / q[k + 1]
    return L, R


def ell_sides(p, q, L, R, i0):
    """Left and right halves of the path Hardy constant at ``i0``, in O(n)."""
    n = len(p) - 1
    left = 0.0
    if i0 > 0:
        s = L[i0 - 1] / p[i0 - 1]
        left = s
        for j in range(i0 - 2, -1, -1):
            s = L[j] / p[j] + (L[j] * q[j + 1] / (p[j] * L[j + 1])) * s
            left = max(left, s)
    right = 0.0
    if i0 < n:
        s = R[i0 + 1] / q[i0 + 1]
        right = s
        for j in range(i0 + 2, n + 1):
            s = R[j] / q[j] + (R[j] * p[j - 1] / (q[j] * R[j - 1])) * s
            right = max(right, s)
    return left, right
