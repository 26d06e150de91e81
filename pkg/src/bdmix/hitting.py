"""Expected passage times and the path constants that bracket gap and mixing.

Passage sums are evaluated with normalisation-free ratios: with
``L[k] = pi([0,k])/pi(k)`` and ``R[k] = pi([k,n])/pi(k)`` (both obtained by
one-term recurrences in the rates), the expected time to step from ``k`` to
``k+1`` is ``L[k]/p_k`` and from ``k`` to ``k-1`` is ``R[k]/q_k``.  Nothing
here underflows when ``pi`` spans hundreds of orders of magnitude.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .core import BDChain, StationaryDist, median, quantile_state, stationary
from .errors import SymmetryError, ZeroWeightError

SYM_TOL = 1e-12


def step_times(chain: BDChain):
    """Expected one-step passage times.

    Returns
    -------
    up : ndarray, shape (n,)
        ``up[k] = E_k tau_{k+1}``.
    down : ndarray, shape (n,)
        ``down[k-1] = E_k tau_{k-1}`` for ``k = 1..n``.
    """
    p, q = chain.p, chain.q
    L, R = _backend.kernels.passage_ratios(p, q)
    return np.asarray(L)[:-1] / p[:-1], np.asarray(R)[1:] / q[1:]


def expected_passage(chain: BDChain, dist: Optional[StationaryDist], i: int, j: int) -> float:
    """``E_i tau_j`` for the discrete chain (also the continuous-time value).

    The ``delta``-lazy chain takes ``1/(1-delta)`` times as long.  ``dist`` is
    unused and accepted for call-site uniformity.
    """
    if i == j:
        return 0.0
    up, down = step_times(chain)
    if i < j:
        return math.fsum(up[i:j])
    return math.fsum(down[j:i])


def passage_sums(chain: BDChain, i0: int):
    """``(E_0 tau_{i0}, E_n tau_{i0})``."""
    up, down = step_times(chain)
    return math.fsum(up[:i0]), math.fsum(down[i0:])


def t_constant(chain: BDChain, dist: Optional[StationaryDist] = None,
               i0: Optional[int] = None) -> float:
    """``max{E_0 tau_{i0}, E_n tau_{i0}}``, by default at the median."""
    if i0 is None:
        i0 = median(dist if dist is not None else stationary(chain))
    return max(passage_sums(chain, i0))


def t_constant_at(chain: BDChain, dist: StationaryDist, c: float) -> float:
    """:func:`t_constant` at the ``c``-quantile state instead of the median."""
    return t_constant(chain, dist, quantile_state(dist, c))


def ell_sides(chain: BDChain, i0: int):
    """``(C_-(i0), C_+(i0))`` for the chain's own edge weights ``pi(k) p_k``."""
    L, R = _backend.kernels.passage_ratios(chain.p, chain.q)
    return _backend.kernels.ell_sides(chain.p, chain.q, L, R, i0)


def ell_constant(chain: BDChain, dist: Optional[StationaryDist] = None,
                 i0: Optional[int] = None) -> float:
    """Path Hardy constant at ``i0`` (default: the median); empty maxima are 0."""
    if i0 is None:
        i0 = median(dist if dist is not None else stationary(chain))
    return max(ell_sides(chain, i0))


def chain_weights(chain: BDChain, dist: StationaryDist) -> np.ndarray:
    """Edge conductances ``nu(k, k+1) = pi(k) p_k``."""
    return dist.prob[:-1] * chain.p[:-1]


def hardy_sides(dist: StationaryDist, nu, i: int):
    """``(C_-(i), C_+(i))`` for vertex law ``dist`` and edge weights ``nu``."""
    nu = np.asarray(nu, dtype=float)
    if nu.size != dist.n or np.any(~(nu > 0)):
        raise ZeroWeightError("edge weights must be positive, one per edge")
    return _backend.kernels.hardy_sides(dist.prefix, dist.suffix, 1.0 / nu, i)


def hardy_C(dist: StationaryDist, nu, i: int) -> float:
    """``C(i) = max{C_+(i), C_-(i)}``.

    ``C_+(i) = max_{j>i} pi([j,n]) sum_{k=i+1}^{j} 1/nu(k-1,k)`` and
    ``C_-(i) = max_{j<i} pi([0,j]) sum_{k=j}^{i-1} 1/nu(k,k+1)``; the
    inner sums are compensated.  For every ``m`` the gap of the path lies in
    ``[1/(4 C(m)), 1/(min{pi([0,m]), pi([m,n])} C(m))]``.

    Examples
    --------
    >>> from bdmix.core import StationaryDist
    >>> import numpy as np
    >>> d = StationaryDist(np.zeros(2), np.array([.5, .5]), np.array([.5, 1.]), np.array([1., .5]))
    >>> hardy_C(d, [1.0], 0)
    0.5
    """
    return max(hardy_sides(dist, nu, i))


def hardy_B(mu, pi) -> float:
    """``B = max_i pi([i,n]) sum_{j<=i} 1/mu(j)`` for positive sequences on ``1..n``.

    The optimal constant ``A`` in the weighted Hardy inequality
    ``sum_i pi(i) (g(1)+...+g(i))^2 <= A sum_i mu(i) g(i)^2`` satisfies
    ``B <= A <= 4B``.
    """
    mu = np.asarray(mu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if mu.shape != pi.shape or mu.size == 0:
        raise ZeroWeightError("mu and pi must be non-empty and of equal length")
    if np.any(~(mu > 0)) or np.any(~(pi > 0)):
        raise ZeroWeightError("mu and pi must be strictly positive")
    tail = np.cumsum(pi[::-1])[::-1]
    head = np.cumsum(1.0 / mu)
    return float(np.max(tail * head))


def is_symmetric(chain: BDChain, tol: float = SYM_TOL) -> bool:
    """Whether ``p_i = q_{n-i}`` for all ``i``."""
    return bool(np.all(np.abs(chain.p - chain.q[::-1]) <= tol))


def sym_C(chain: BDChain, dist: StationaryDist) -> float:
    """Gap constant for chains symmetric about ``n/2``: ``1/(4C) <= gap <= 1/C``.

    With ``N = ceil(n/2)`` and ``nu(j, j+1) = pi(j) p_j``,
    ``C = max_{0<=i<N} pi([0,i]) sum_{j=i}^{N-1} 1/nu(j,j+1)``, except that for
    odd ``n`` the last edge ``(N-1, N)`` enters with half weight ``1/(2 nu)``.
    """
    if not is_symmetric(chain):
        raise SymmetryError("need p_i = q_{n-i} for every i")
    n = chain.n
    if n == 0:
        return 0.0
    N = -(-n // 2)
    inv = 1.0 / chain_weights(chain, dist)[:N]
    if n % 2:
        inv[N - 1] *= 0.5
    tails = np.cumsum(inv[::-1])[::-1]
    return float(np.max(dist.prefix[:N] * tails))


@dataclass(frozen=True)
class BoundsReport:
    """Hitting and Hardy constants at the median and the brackets they give.

    ``gap`` lies in ``[gap_lo, gap_hi] = [1/(4 ell), 2/ell]``; the
    continuous-time mixing time ``T(1/10)`` is at least ``mix_lo = t/6`` and
    ``T(eps)`` is at most ``mix_hi(eps) = 18 t / eps^2``.
    """

    i0: int
    t: float
    ell: float
    e0: float
    en: float
    c_minus: float
    c_plus: float
    gap_lo: float
    gap_hi: float
    mix_lo: float
    eps: tuple = field(default=(0.25, 0.1, 0.05))

    def mix_hi(self, eps: float) -> float:
        return 18.0 * self.t / eps ** 2

    def to_dict(self) -> dict:
        doc = {k: getattr(self, k) for k in
               ("i0", "t", "ell", "e0", "en", "c_minus", "c_plus", "gap_lo", "gap_hi", "mix_lo")}
        doc["mix_hi"] = {repr(e): self.mix_hi(e) for e in self.eps}
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def bounds_report(chain: BDChain, dist: Optional[StationaryDist] = None,
                  eps: Sequence[float] = (0.25, 0.1, 0.05)) -> BoundsReport:
    dist = dist if dist is not None else stationary(chain)
    i0 = median(dist)
    e0, en = passage_sums(chain, i0)
    cm, cp = ell_sides(chain, i0)
    t, ell = max(e0, en), max(cm, cp)
    gap_lo = 1.0 / (4.0 * ell) if ell > 0 else math.inf
    gap_hi = 2.0 / ell if ell > 0 else math.inf
    return BoundsReport(i0=i0, t=t, ell=ell, e0=e0, en=en, c_minus=cm, c_plus=cp,
                        gap_lo=gap_lo, gap_hi=gap_hi, mix_lo=t / 6.0, eps=tuple(eps))
