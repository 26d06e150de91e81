"""Birth-and-death chains on {0, ..., n}: representation and basic quantities.

A chain is given by its birth rates ``p``, death rates ``q`` and holding
rates ``r``.  Everything else in the package consumes a :class:`BDChain`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (BoundaryError, ParseError, RangeError, ReducibleError,
                     RowSumError)

ROW_TOL = 1e-12
_CMP_TOL = 4 * np.finfo(float).eps


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BDChain:
    """Birth-death chain with rates ``K(i,i+1)=p[i]``, ``K(i,i-1)=q[i]``, ``K(i,i)=r[i]``.

    ``r`` may be omitted, in which case it is ``1 - p - q``.  When a supplied
    ``r`` makes a row sum differ from one by at most ``1e-12`` it is replaced
    by ``1 - p - q``.  With ``check=True`` (default) the chain is validated on
    construction; pass ``check=False`` to build an arbitrary triple and call
    :func:`validate` yourself.
    """

    p: np.ndarray
    q: np.ndarray
    r: Optional[np.ndarray] = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float).ravel()
        q = np.array(self.q, dtype=float).ravel()
        if p.shape != q.shape or p.size == 0:
            raise RangeError("p and q must be non-empty and of equal length")
        if self.r is None:
            r = 1.0 - p - q
            r[np.abs(r) <= ROW_TOL] = 0.0
        else:
            r = np.array(self.r, dtype=float).ravel()
            if r.shape != p.shape:
                raise RangeError("r must have the same length as p and q")
            resid = p + q + r - 1.0
            fix = np.abs(resid) <= ROW_TOL
            r = np.where(fix, np.maximum(1.0 - p - q, 0.0), r)
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "q", _frozen(q))
        object.__setattr__(self, "r", _frozen(r))
        if self.check:
            validate(self)

    @property
    def n(self) -> int:
        return self.p.size - 1

    @property
    def size(self) -> int:
        return self.p.size

    def kernel(self) -> np.ndarray:
        """Dense transition matrix."""
        n = self.n
        K = np.diag(self.r.copy())
        idx = np.arange(n)
        K[idx, idx + 1] = self.p[:-1]
        K[idx + 1, idx] = self.q[1:]
        return K

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p.tolist(), "q": self.q.tolist(),
                "r": self.r.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "BDChain":
        try:
            p, q = doc["p"], doc["q"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"chain document needs 'p' and 'q': {exc}") from None
        if "n" in doc and int(doc["n"]) != len(p) - 1:
            raise ParseError(f"n={doc['n']} but len(p)={len(p)}")
        return cls(p, q, doc.get("r"))

    @classmethod
    def from_json(cls, text: str) -> "BDChain":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    def __eq__(self, other):
        if not isinstance(other, BDChain):
            return NotImplemented
        return (np.array_equal(self.p, other.p) and np.array_equal(self.q, other.q)
                and np.array_equal(self.r, other.r))

    __hash__ = None


def validate(chain: BDChain) -> None:
    """Raise if ``chain`` is not a valid irreducible birth-death chain."""
    p, q, r = chain.p, chain.q, chain.r
    for name, a in (("p", p), ("q", q), ("r", r)):
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
            bad = int(np.flatnonzero(~((a >= 0) & (a <= 1)))[0])
            raise RangeError(f"{name}[{bad}]={float(a[bad])!r} outside [0, 1]")
    if q[0] != 0.0 or p[-1] != 0.0:
        raise BoundaryError(f"need q[0]=0 and p[n]=0, got q[0]={float(q[0])!r}, p[n]={float(p[-1])!r}")
    resid = np.abs(p + q + r - 1.0)
    if np.any(resid > ROW_TOL):
        i = int(np.argmax(resid))
        raise RowSumError(f"rates at state {i} sum to {float(p[i] + q[i] + r[i])!r}")
    if np.any(p[:-1] <= 0) or np.any(q[1:] <= 0):
        i = int(np.flatnonzero((p[:-1] <= 0) | (q[1:] <= 0))[0])
        raise ReducibleError(f"edge ({i}, {i + 1}) has p[{i}]={float(p[i])!r}, q[{i + 1}]={float(q[i + 1])!r}")


@dataclass(frozen=True, eq=False)
class StationaryDist:
    """Stationary law of a chain.

    ``logw[i]`` is ``log(p_0...p_{i-1} / (q_1...q_i))``; ``prob`` is the
    normalised law; ``prefix[i] = pi([0, i])`` and ``suffix[i] = pi([i, n])``
    (both accumulated from their own end so that tails keep full relative
    precision).
    """

    logw: np.ndarray
    prob: np.ndarray
    prefix: np.ndarray
    suffix: np.ndarray

    @property
    def n(self) -> int:
        return self.prob.size - 1

    def mass(self, a: int, b: int) -> float:
        """``pi([a, b])``; empty ranges give 0."""
        if b < a:
            return 0.0
        return math.fsum(self.prob[a:b + 1])


def stationary(chain: BDChain) -> StationaryDist:
    steps = np.log(chain.p[:-1]) - np.log(chain.q[1:])
    logw = np.concatenate(([0.0], np.cumsum(steps)))
    if not np.all(np.isfinite(logw)):
        raise OverflowError("non-finite log stationary weight")
    logz = logsumexp(logw)
    prob = np.exp(logw - logz)
    prob /= math.fsum(prob)
    prefix = np.cumsum(prob)
    suffix = np.cumsum(prob[::-1])[::-1]
    return StationaryDist(_frozen(logw), _frozen(prob), _frozen(prefix), _frozen(suffix))


def quantile_state(dist: StationaryDist, c: float) -> int:
    """Smallest ``i`` with ``pi([0,i-1]) <= c`` and ``pi([i+1,n]) <= 1-c``."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    n = dist.n
    below = np.concatenate(([0.0], dist.prefix[:-1]))      # pi([0, i-1])
    above = np.concatenate((dist.suffix[1:], [0.0]))       # pi([i+1, n])
    ok = (below <= c + _CMP_TOL) & (above <= 1.0 - c + _CMP_TOL)
    hits = np.flatnonzero(ok)
    if hits.size:
        return int(hits[0])
    return int(min(np.searchsorted(dist.prefix, c - _CMP_TOL), n))


def median(dist: StationaryDist) -> int:
    """Smallest state ``i0`` with ``pi([0,i0]) >= 1/2`` and ``pi([i0,n]) >= 1/2``."""
    return quantile_state(dist, 0.5)


def lazy(chain: BDChain, delta: float) -> BDChain:
    """The delta-lazy chain ``delta*I + (1-delta)*K``."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    if delta == 0.0:
        return chain
    s = 1.0 - delta
    return BDChain(s * chain.p, s * chain.q, delta + s * chain.r)


def two_state(p0: float, q1: float) -> BDChain:
    return BDChain([p0, 0.0], [0.0, q1])


def from_rates(p: Sequence[float], q: Sequence[float]) -> BDChain:
    """Chain from birth rates ``p_0..p_{n-1}`` and death rates ``q_1..q_n``."""
    return BDChain(np.append(np.asarray(p, float), 0.0),
                   np.insert(np.asarray(q, float), 0, 0.0))
