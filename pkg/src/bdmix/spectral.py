"""Spectrum of ``I - K`` for a birth-death chain.

The default route never forms ``I - K``.  Reversibility makes the symmetrized
matrix a Gram product ``G G^T`` with ``G`` lower-bidiagonal (entries
``sqrt(p_k)`` and ``-sqrt(q_{k+1})``), so the nonzero eigenvalues are the
squared singular values of ``G``.  These are found by Sturm bisection on the
zero-diagonal Golub-Kahan tridiagonal, which delivers every eigenvalue to
high *relative* accuracy, including very small spectral gaps.  The
``method="direct"`` route bisects the symmetrized matrix itself and is kept
as a cross-check.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .core import BDChain, StationaryDist
from .errors import DomainError, SideConditionError, SpectralError

ZERO_TOL = 1e-9
TRACE_RTOL = 1e-8
_RTOL = 4 * np.finfo(float).eps
_MAX_ITER = 400
_TINY = 1e-300


@dataclass(frozen=True)
class SpectrumReport:
    """Nonzero eigenvalues of ``I - K`` in ascending order.

    Attributes
    ----------
    eigs : ndarray
        ``lambda_1 <= ... <= lambda_n``; the zero eigenvalue is excluded.
    gap : float
        ``lambda_1``.  A single-state chain has no nonzero eigenvalue and
        reports ``inf``.
    inv_sum : float
        ``sum(1 / eigs)``.
    """

    eigs: np.ndarray
    gap: float
    inv_sum: float

    def to_dict(self) -> dict:
        return {"eigs": [float(x) for x in self.eigs], "gap": float(self.gap),
                "inv_sum": float(self.inv_sum)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_eigs(cls, eigs) -> "SpectrumReport":
        eigs = np.sort(np.asarray(eigs, dtype=float))
        eigs.setflags(write=False)
        gap = float(eigs[0]) if eigs.size else math.inf
        return cls(eigs, gap, math.fsum(1.0 / eigs))

    @classmethod
    def from_json(cls, text: str) -> "SpectrumReport":
        return cls.from_eigs(json.loads(text)["eigs"])


def symmetrize(chain: BDChain, dist: Optional[StationaryDist] = None):
    """Diagonal and off-diagonal of ``D^(1/2) (I - K) D^(-1/2)``, ``D = diag(pi)``.

    Returns
    -------
    d : ndarray, shape (n+1,)
        ``1 - r_i``.
    e : ndarray, shape (n,)
        ``-sqrt(p_i q_{i+1})``.  ``dist`` is accepted for symmetry with the
        other routines and is not needed: detailed balance makes the
        geometric mean equal to ``-p_i sqrt(pi(i)/pi(i+1))``.
    """
    d = 1.0 - chain.r
    e = -np.sqrt(chain.p[:-1] * chain.q[1:])
    return d, e


def _gk_squares(e2: np.ndarray, npos: int, k0: int = 0, k1: Optional[int] = None) -> np.ndarray:
    """Squares of the positive eigenvalues ``k0..k1-1`` of a zero-diagonal tridiagonal.

    ``e2`` holds the squared off-diagonal; ``npos`` is the number of
    positive eigenvalues, which sit at the top of the spectrum.
    """
    k1 = npos if k1 is None else k1
    m = e2.size + 1
    d = np.zeros(m)
    off = np.sqrt(e2)
    hi = float(np.max(np.concatenate(([0.0], off)) + np.concatenate((off, [0.0])))) * (1 + 1e-12)
    base = m - npos
    sig = _backend.kernels.bisect_eigenvalues(d, e2, base + k0, base + k1, _TINY, hi,
                                              _RTOL, 0.0, _MAX_ITER)
    return np.asarray(sig) ** 2


def _check_trace(lams: np.ndarray, trace: float, what: str) -> None:
    if lams.size == 0:
        return
    if not np.all(lams > 0):
        raise SpectralError(f"{what}: nonpositive eigenvalue {lams.min()!r}")
    tot = math.fsum(lams)
    if abs(tot - trace) > TRACE_RTOL * max(trace, 1.0):
        raise SpectralError(f"{what}: eigenvalue sum {tot!r} differs from trace {trace!r}")


def _direct(chain: BDChain) -> np.ndarray:
    d, e = symmetrize(chain)
    e2 = e * e
    r = np.abs(np.concatenate(([0.0], e, [0.0])))
    lo = float(np.min(d - r[:-1] - r[1:])) - 1e-12
    hi = float(np.max(d + r[:-1] + r[1:])) + 1e-12
    atol = 2 * np.finfo(float).eps * max(abs(lo), abs(hi))
    lam = np.asarray(_backend.kernels.bisect_eigenvalues(
        d, e2, 0, d.size, lo, hi, _RTOL, atol, _MAX_ITER))
    if abs(lam[0]) >= ZERO_TOL:
        raise SpectralError(f"smallest eigenvalue {lam[0]!r} is not numerically zero")
    return lam[1:]


def eigenvalues(chain: BDChain, method: str = "factored") -> SpectrumReport:
    """All nonzero eigenvalues of ``I - K``.

    Parameters
    ----------
    chain : BDChain
    method : {"factored", "direct"}
        ``"factored"`` (default) bisects the Golub-Kahan form of the Gram
        factor and is relatively accurate for every eigenvalue.
        ``"direct"`` bisects the symmetrized matrix with an absolute
        tolerance and asserts that its smallest eigenvalue is below
        ``1e-9`` before removing it.

    Raises
    ------
    SpectralError
        If the eigenvalues fail the trace identity or positivity, or the
        direct route does not find the zero eigenvalue.
    """
    if chain.n == 0:
        return SpectrumReport.from_eigs([])
    if method == "factored":
        e2 = np.empty(2 * chain.n)
        e2[0::2] = chain.p[:-1]
        e2[1::2] = chain.q[1:]
        lams = _gk_squares(e2, chain.n)
    elif method == "direct":
        lams = _direct(chain)
    else:
        raise ValueError(f"unknown method {method!r}")
    lams = np.sort(lams)
    _check_trace(lams, math.fsum(1.0 - chain.r), "spectrum")
    return SpectrumReport.from_eigs(lams)


def spectral_gap(chain: BDChain) -> float:
    """Smallest nonzero eigenvalue of ``I - K`` alone (cheaper than the full spectrum)."""
    if chain.n == 0:
        return math.inf
    e2 = np.empty(2 * chain.n)
    e2[0::2] = chain.p[:-1]
    e2[1::2] = chain.q[1:]
    return float(_gk_squares(e2, chain.n, 0, 1)[0])


def sub_spectrum(chain: BDChain, i: int) -> np.ndarray:
    """Eigenvalues of the principal block of ``I - K`` on ``{0, ..., i-1}``.

    The block is ``G G^T`` with ``G`` square bidiagonal (``sqrt(p_0..p_{i-1})``
    on the diagonal, ``-sqrt(q_1..q_{i-1})`` below), so the same relative
    accurate route applies.  Ascending, all strictly positive.
    """
    if not 1 <= i <= chain.n:
        raise ValueError(f"target state must lie in 1..{chain.n}, got {i}")
    e2 = np.empty(2 * i - 1)
    e2[0::2] = chain.p[:i]
    e2[1::2] = chain.q[1:i]
    lams = np.sort(_gk_squares(e2, i))
    _check_trace(lams, math.fsum(chain.p[:i]) + math.fsum(chain.q[:i]), f"block 0..{i - 1}")
    return lams


def s_constant(report: SpectrumReport) -> float:
    """Sum of inverse nonzero eigenvalues."""
    return math.fsum(1.0 / report.eigs)


def gap_mixing_lower(gap: float, eps: float, mode: str = "continuous",
                     delta: Optional[float] = None, statecount: Optional[int] = None) -> float:
    """Mixing-time lower bound implied by the spectral gap alone.

    Continuous time: ``-log(2 eps) / gap``.  Lazy chain ``K_delta``:
    ``floor(-log(2 eps) / (2 max{1-delta, log(2/delta)} gap))``, valid when the
    state space has at least ``2/delta`` states.
    """
    if not 0.0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    num = -math.log(2.0 * eps)
    if mode == "continuous":
        return num / gap
    if mode == "lazy":
        if delta is None or statecount is None:
            raise ValueError("lazy mode needs delta and statecount")
        if not 0.0 < delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {delta}")
        if statecount < 2.0 / delta:
            raise SideConditionError(f"need at least 2/delta = {2.0 / delta:g} states, got {statecount}")
        return float(math.floor(num / (2.0 * max(1.0 - delta, math.log(2.0 / delta)) * gap)))
    raise ValueError(f"unknown mode {mode!r}")
