"""Total-variation profiles, mixing times and passage-time laws.

Profiles are exact up to rounding: powers of the dense kernel for discrete
time, and for continuous time a Poisson (uniformised) series at a short time
step followed by repeated squaring.  Every product of stochastic matrices
has its rows renormalised, which keeps rounding from drifting mass in or out
over tens of squarings.
"""
from __future__ import annotations

import csv
import decimal
import io
import json
import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional, Sequence

import numpy as np

from .core import BDChain, StationaryDist, lazy, median, stationary
from .errors import (AccuracyError, ConvergenceError, DegenerateSpectrumError,
                     DimensionError, DomainError, PeriodicityError, SizeError)
from .hitting import passage_sums
from .spectral import spectral_gap, sub_spectrum

#: largest state count for which dense matrices are formed
DENSE_LIMIT = 2000
POISSON_TAIL = 1e-13
#: continuous mixing times are resolved to this many inverse gaps
TIME_RESOLUTION = 1e-6
PERIODIC_CAP = 1 << 24
MAX_LEVELS = 160
SURVIVAL_TOL = 1e-9
_CANCEL_TOL = 1e-10
_DEGENERATE_RTOL = 1e-13
_EPS = np.finfo(float).eps


def tv_distance(mu, nu) -> float:
    """Half the L1 distance between two probability vectors."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise DimensionError(f"shapes {mu.shape} and {nu.shape} differ")
    return 0.5 * math.fsum(np.abs(mu - nu))


def _worst_tv(P: np.ndarray, pi: np.ndarray) -> float:
    return float(np.max(0.5 * np.sum(np.abs(P - pi), axis=1)))


def _renorm(P: np.ndarray) -> np.ndarray:
    P /= P.sum(axis=1, keepdims=True)
    return P


def _mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return _renorm(A @ B)


def _dense(chain: BDChain) -> np.ndarray:
    if chain.size > DENSE_LIMIT:
        raise SizeError(f"{chain.size} states exceed the dense limit {DENSE_LIMIT}")
    return chain.kernel()


def _matrix_power(K: np.ndarray, m: int) -> np.ndarray:
    P = np.eye(K.shape[0])
    B = K
    while m:
        if m & 1:
            P = _mul(P, B)
        m >>= 1
        if m:
            B = _mul(B, B)
    return P


def _poisson_series(K: np.ndarray, tau: float, tail: float) -> np.ndarray:
    """``exp(-tau (I - K))`` for ``tau <= 1`` by the truncated Poisson mixture.

    Terms stop once the remaining Poisson mass, bounded by twice the next
    weight, is below ``tail``.
    """
    term = np.eye(K.shape[0])
    weight = math.exp(-tau)
    out = weight * term
    k = 0
    while 2.0 * weight * tau / (k + 1) > tail and k < 200:
        k += 1
        term = term @ K
        weight *= tau / k
        out += weight * term
    return _renorm(out)


def _semigroup(K: np.ndarray, t: float) -> np.ndarray:
    """``exp(-t (I - K))`` by scaling and squaring of the Poisson series.

    Each squaring doubles the truncation error, so the step series is cut
    at ``POISSON_TAIL / 2^s`` to keep the total below ``POISSON_TAIL``.
    """
    if t == 0:
        return np.eye(K.shape[0])
    s = max(0, math.ceil(math.log2(t))) if t > 1 else 0
    H = _poisson_series(K, t / 2.0 ** s, POISSON_TAIL / 2.0 ** s)
    for _ in range(s):
        H = _mul(H, H)
    return H


def heat_kernel(chain: BDChain, t: float) -> np.ndarray:
    """Dense ``H_t = exp(-t (I - K))``."""
    return _semigroup(_dense(chain), float(t))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TVProfile:
    """Worst-case total-variation distance to stationarity along a time grid.

    ``mode`` is ``"discrete"``, ``"continuous"`` or ``"lazy:<delta>"``.
    """

    mode: str
    times: np.ndarray
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, TVProfile):
            return NotImplemented
        return (self.mode == other.mode and np.array_equal(self.times, other.times)
                and np.array_equal(self.values, other.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "d_tv"])
        for t, v in zip(self.times, self.values):
            w.writerow([_fmt(t), _fmt(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, mode: str = "continuous") -> "TVProfile":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["time", "d_tv"]:
            raise ValueError("expected header 'time,d_tv'")
        conv = float if mode == "continuous" else int
        times = np.array([conv(r[0]) for r in rows[1:]])
        vals = np.array([float(r[1]) for r in rows[1:]])
        return cls(mode, times, vals)

    def to_json(self) -> str:
        return json.dumps({"mode": self.mode, "times": self.times.tolist(),
                           "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "TVProfile":
        doc = json.loads(text)
        return cls(doc["mode"], np.asarray(doc["times"]), np.asarray(doc["values"], dtype=float))


def _check_sorted(times):
    if len(times) > 1 and np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted ascending")


def tv_profile_discrete(chain: BDChain, times: Sequence[int], mode: str = "discrete") -> TVProfile:
    """``d(m) = max_x ||K^m(x, .) - pi||_TV`` at each integer ``m`` in ``times``."""
    times = np.asarray(times, dtype=np.int64)
    _check_sorted(times)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    K = _dense(chain)
    pi = stationary(chain).prob
    P = np.eye(K.shape[0])
    last = 0
    vals = np.empty(times.size)
    for k, m in enumerate(times):
        if m > last:
            P = _mul(P, _matrix_power(K, int(m - last)))
            last = int(m)
        vals[k] = _worst_tv(P, pi)
    return TVProfile(mode, times, vals)


def tv_profile_lazy(chain: BDChain, delta: float, times: Sequence[int]) -> TVProfile:
    return tv_profile_discrete(lazy(chain, delta), times, mode=f"lazy:{delta!r}")


def tv_profile_continuous(chain: BDChain, times: Sequence[float]) -> TVProfile:
    """``d(t) = max_x ||H_t(x, .) - pi||_TV`` at each real ``t`` in ``times``."""
    times = np.asarray(times, dtype=float)
    _check_sorted(times)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    K = _dense(chain)
    pi = stationary(chain).prob
    vals = np.array([_worst_tv(_semigroup(K, float(t)), pi) for t in times])
    return TVProfile("continuous", times, vals)


def parse_mode(mode: str, delta: Optional[float] = None):
    """Split ``"lazy:0.5"`` style strings into ``("lazy", 0.5)``."""
    if mode.startswith("lazy"):
        if ":" in mode:
            delta = float(mode.split(":", 1)[1])
        if delta is None or not 0.0 < delta < 1.0:
            raise DomainError(f"lazy mode needs delta in (0, 1), got {delta}")
        return "lazy", delta
    if mode in ("discrete", "continuous"):
        return mode, None
    raise ValueError(f"unknown mode {mode!r}")


def mixing_times(chain: BDChain, eps: Sequence[float], mode: str = "continuous",
                 delta: Optional[float] = None) -> list:
    """:func:`mixing_time` for several thresholds, sharing one ladder of powers.

    The ladder holds ``P_j = (base step)^(2^j)`` until ``d(P_j) <= min(eps)``;
    each threshold is then located by binary descent over the ladder, so the
    profile is never sampled on a uniform grid.
    """
    eps = [float(e) for e in eps]
    for e in eps:
        if not 0.0 < e < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {e}")
    kind, delta = parse_mode(mode, delta)
    target = chain if kind != "lazy" else lazy(chain, delta)
    K = _dense(target)
    pi = stationary(target).prob
    d0 = _worst_tv(np.eye(K.shape[0]), pi)
    if kind == "continuous":
        unit = TIME_RESOLUTION / spectral_gap(chain) if chain.n else 1.0
        base = _semigroup(K, unit)
    else:
        unit = 1
        base = K
    periodic = kind == "discrete" and not np.any(chain.r > 0)
    ladder = [base]
    dists = [_worst_tv(base, pi)]
    floor = min(eps)
    while dists[-1] > floor:
        steps = 1 << (len(ladder) - 1)
        if periodic and steps >= PERIODIC_CAP:
            raise PeriodicityError("chain has no holding and d(m) does not drop below "
                                   f"{floor} within {steps} steps")
        if len(ladder) > MAX_LEVELS:
            raise ConvergenceError(f"d(t) still {dists[-1]:.3g} after {steps} time units")
        ladder.append(_mul(ladder[-1], ladder[-1]))
        dists.append(_worst_tv(ladder[-1], pi))

    out = []
    for e in eps:
        if d0 <= e:
            out.append(0 if kind != "continuous" else 0.0)
            continue
        j = next(k for k, v in enumerate(dists) if v <= e)
        # largest count m with d(m * unit) > e, built from high bits down
        m = 0
        P = None
        for k in range(j - 1, -1, -1):
            cand = ladder[k] if P is None else _mul(P, ladder[k])
            if _worst_tv(cand, pi) > e:
                P = cand
                m += 1 << k
        out.append((m + 1) * unit if kind == "continuous" else m + 1)
    return out


def mixing_time(chain: BDChain, eps: float, mode: str = "continuous",
                delta: Optional[float] = None):
    """``T(eps) = inf{t : d(t) <= eps}``.

    Parameters
    ----------
    chain : BDChain
    eps : float
        Threshold in (0, 1).
    mode : {"continuous", "discrete", "lazy"} or "lazy:<delta>"
        Continuous times are resolved to ``1e-6 / gap`` and the upper end of
        the final bracket is returned; discrete and lazy times are exact
        integers.
    delta : float, optional
        Holding probability for ``"lazy"``.

    Raises
    ------
    PeriodicityError
        Discrete mode on a chain with no holding whose distance never
        reaches ``eps`` (it is 2-periodic).
    """
    return mixing_times(chain, [eps], mode, delta)[0]


def _mode_from(mode: str):
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"mode must be 'discrete' or 'continuous', got {mode!r}")
    return mode


def _times_array(t, mode):
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < 0):
        raise ValueError("times must be nonnegative")
    if mode == "discrete" and np.any(arr != np.round(arr)):
        raise ValueError("discrete mode needs integer times")
    return arr


def _coefficients(lams: np.ndarray):
    """``log|c_j|`` and ``sign(c_j)`` for ``c_j = prod_{k != j} lam_k / (lam_k - lam_j)``."""
    i = lams.size
    logl = np.log(lams)
    diff = lams[None, :] - lams[:, None]          # diff[j, k] = lam_k - lam_j
    np.fill_diagonal(diff, 1.0)
    logc = (logl.sum() - logl) - np.log(np.abs(diff)).sum(axis=1)
    sign = np.where(np.arange(i) % 2 == 0, 1.0, -1.0)
    return logc, sign


def _check_distinct(lams: np.ndarray):
    gaps = np.diff(lams)
    if np.any(gaps <= _DEGENERATE_RTOL * lams[1:]):
        k = int(np.argmin(gaps / lams[1:]))
        raise DegenerateSpectrumError(
            f"sub-spectrum eigenvalues {lams[k]!r} and {lams[k + 1]!r} coincide")


def _terms_double(lams, logc, sign, t, mode):
    if mode == "continuous":
        logb = -t * lams
        sb = np.ones_like(lams)
    else:
        beta = 1.0 - lams
        # log|1 - lam| without rounding 1 - lam first
        with np.errstate(divide="ignore"):
            loga = np.where(lams < 1.0, np.log1p(-np.minimum(lams, 1.0)), np.log(np.abs(lams - 1.0)))
        logb = t * loga if t > 0 else np.zeros_like(lams)
        sb = np.where(beta < 0, (-1.0) ** (int(t) % 2), 1.0)
        if t > 0:
            sb = np.where(beta == 0, 0.0, sb)
    return sign * sb * np.exp(logc + logb)


def _sensitivity(lams, t, mode):
    """Per-term relative error multiplier for relative eigenvalue errors."""
    s = lams[None, :] + lams[:, None]
    d = np.abs(lams[None, :] - lams[:, None])
    np.fill_diagonal(d, np.inf)
    coef = np.sum(1.0 + s / d, axis=1) - 1.0
    if mode == "continuous":
        expo = t * lams
    else:
        beta = np.abs(1.0 - lams)
        with np.errstate(divide="ignore"):
            expo = np.where(beta > 0, t * lams / beta, 0.0)
    return coef + expo


def _refine_eigs(chain: BDChain, i: int, start, lams: np.ndarray, prec: int):
    """Newton-refine the block eigenvalues in ``prec``-digit decimal arithmetic.

    The characteristic polynomial of the block and its derivative come from
    the three-term recurrence on the exact (binary) rates.
    """
    with decimal.localcontext() as ctx:
        ctx.prec = prec
        p = [Decimal(float(x)) for x in chain.p[:i]]
        q = [Decimal(float(x)) for x in chain.q[:i + 1]]
        d = [p[k] + q[k] for k in range(i)]
        e2 = [p[k] * q[k + 1] for k in range(i - 1)]
        tol = Decimal(10) ** (-prec + 5)
        one, zero = Decimal(1), Decimal(0)
        out = []
        for x, lam in zip(start, lams):
            x = Decimal(x) if not isinstance(x, Decimal) else +x
            for _ in range(60):
                f0, f1 = one, d[0] - x
                g0, g1 = zero, -one
                for k in range(1, i):
                    f0, f1, g0, g1 = (f1, (d[k] - x) * f1 - e2[k - 1] * f0,
                                      g1, -f1 + (d[k] - x) * g1 - e2[k - 1] * g0)
                if g1 == 0:
                    break
                step = f1 / g1
                x -= step
                if abs(step) <= tol * abs(x):
                    break
            if abs(float(x) - lam) > 1e-8 * lam:
                raise AccuracyError(f"eigenvalue refinement drifted from {lam!r} to {float(x)!r}")
            out.append(x)
        return out


def _survival_decimal(dlams, ts, mode, prec):
    with decimal.localcontext() as ctx:
        ctx.prec = prec
        i = len(dlams)
        coef = []
        for j in range(i):
            c = Decimal(1)
            for k in range(i):
                if k != j:
                    c *= dlams[k] / (dlams[k] - dlams[j])
            coef.append(c)
        res = []
        for t in ts:
            if mode == "continuous":
                tt = Decimal(float(t))
                s = sum((c * (-tt * lam).exp() for c, lam in zip(coef, dlams)), Decimal(0))
            else:
                m = int(t)
                s = sum((c * (1 - lam) ** m for c, lam in zip(coef, dlams)), Decimal(0))
            res.append(float(s))
        return np.array(res)


def passage_survival(chain: BDChain, i: int, t, mode: str = "continuous"):
    """``P_0(tau_i > t)`` from the eigenvalues of the block of ``I - K`` on ``{0..i-1}``.

    Uses ``sum_j c_j f(lambda_j)`` with ``c_j = prod_{k != j} lambda_k /
    (lambda_k - lambda_j)`` and ``f(lambda) = exp(-t lambda)`` (continuous) or
    ``(1 - lambda)^t`` (discrete).  Coefficients are held as log-magnitude
    and sign.  When the estimated cancellation error exceeds ``1e-10`` the
    eigenvalues are refined and the sum re-evaluated in extended decimal
    precision.

    Parameters
    ----------
    chain : BDChain
    i : int
        Target state, ``1 <= i <= n``.
    t : float or array_like
        Time(s); integers in discrete mode.
    mode : {"continuous", "discrete"}

    Returns
    -------
    float or ndarray
        Matches the shape of ``t``.

    Raises
    ------
    AccuracyError
        The sum leaves ``[-1e-9, 1 + 1e-9]`` or extended precision does not
        settle it.
    DegenerateSpectrumError
        Two block eigenvalues agree to relative ``1e-13``.

    Examples
    --------
    >>> from bdmix.core import BDChain
    >>> walk = BDChain([.5, .5, 0], [0, .5, .5])
    >>> float(passage_survival(walk, 1, 3, "discrete"))
    0.125
    """
    mode = _mode_from(mode)
    scalar = np.ndim(t) == 0
    ts = _times_array(t, mode)
    lams = sub_spectrum(chain, i)
    _check_distinct(lams)
    logc, sign = _coefficients(lams)
    u = 64.0 * i * _EPS
    out = np.empty(ts.size)
    redo = []
    for k, tk in enumerate(ts):
        terms = _terms_double(lams, logc, sign, tk, mode)
        mag = np.abs(terms)
        err = u * float(np.sum(mag * _sensitivity(lams, tk, mode))) + 4 * i * _EPS * float(mag.sum())
        out[k] = math.fsum(terms)
        if err > _CANCEL_TOL:
            redo.append((k, err))
    if redo:
        worst = max(e for _, e in redo)
        spread = math.log10(lams[-1] / lams[0])
        dps = int(25 + math.ceil(math.log10(worst / u)) + math.ceil(spread))
        idx = [k for k, _ in redo]
        lo = _refine_eigs(chain, i, lams, lams, dps)
        hi = _refine_eigs(chain, i, lo, lams, dps + 15)
        vals = [_survival_decimal(lo, ts[idx], mode, dps),
                _survival_decimal(hi, ts[idx], mode, dps + 15)]
        if np.any(np.abs(vals[0] - vals[1]) > 1e-12):
            raise AccuracyError(f"extended precision did not settle P_0(tau_{i} > t)")
        out[idx] = vals[1]
    if np.any(out < -SURVIVAL_TOL) or np.any(out > 1 + SURVIVAL_TOL):
        bad = out[(out < -SURVIVAL_TOL) | (out > 1 + SURVIVAL_TOL)][0]
        raise AccuracyError(f"survival sum {bad!r} outside [0, 1]")
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def passage_survival_direct(chain: BDChain, i: int, t, mode: str = "continuous"):
    """``P_0(tau_i > t)`` from powers (or the semigroup) of the chain stopped at ``i``.

    The kernel restricted to ``{0..i}`` with ``i`` made absorbing is
    stochastic, so its products keep the absorbed mass as a positive entry
    and stay accurate even when the killing rate is far below machine
    precision relative to the holding.  The survival probability is the mass
    of row 0 on ``{0..i-1}``.
    """
    mode = _mode_from(mode)
    if not 1 <= i <= chain.n:
        raise ValueError(f"target state must lie in 1..{chain.n}, got {i}")
    scalar = np.ndim(t) == 0
    ts = _times_array(t, mode)
    A = _dense(chain)[:i + 1, :i + 1].copy()
    A[i] = 0.0
    A[i, i] = 1.0
    out = np.empty(ts.size)
    for k, tk in enumerate(ts):
        if mode == "discrete":
            row = _matrix_power(A, int(tk))[0]
        else:
            row = _semigroup(A, float(tk))[0]
        out[k] = math.fsum(row[:i])
    return float(out[0]) if scalar else out


def passage_mean(chain: BDChain, i: int) -> float:
    """``E_0 tau_i`` as the sum of inverse block eigenvalues."""
    return math.fsum(1.0 / sub_spectrum(chain, i))


def lazy_passage_variance(chain: BDChain, i: int) -> float:
    """Variance of the passage time ``0 -> i`` for the 1/2-lazy chain.

    The time is a sum of independent geometric variables with success
    probabilities ``lambda_j / 2``, which gives ``sum 4 (1 - lambda_j/2) / lambda_j^2``.
    Diagnostic only.
    """
    lams = sub_spectrum(chain, i)
    return math.fsum(4.0 * (1.0 - lams / 2.0) / lams ** 2)


def tv_lower_hitting(chain: BDChain, dist: StationaryDist, i: int, t,
                     mode: str = "continuous"):
    """Certified lower bound ``max{0, P_0(tau_i > t) - pi([0, i-1])}`` on ``d(0, t)``."""
    surv = passage_survival(chain, i, t, mode)
    head = dist.prefix[i - 1]
    return np.maximum(0.0, surv - head) if np.ndim(surv) else max(0.0, surv - head)


def _lazy_factor(mode: str, delta: Optional[float]) -> float:
    kind, delta = parse_mode(mode, delta)
    if kind == "continuous":
        return 1.0
    if kind != "lazy":
        raise ValueError("mode must be continuous or lazy")
    if delta < 0.5:
        raise DomainError(f"lazy bounds need delta >= 1/2, got {delta}")
    return 1.0 - delta


def mix_upper_bound(chain: BDChain, dist: Optional[StationaryDist], eps: float,
                    mode: str = "continuous", delta: Optional[float] = None) -> float:
    """``9 (E_0 tau_{i0} + E_n tau_{i0}) / eps^2``, divided by ``1 - delta`` for lazy chains."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    scale = _lazy_factor(mode, delta)
    dist = dist if dist is not None else stationary(chain)
    e0, en = passage_sums(chain, median(dist))
    return 9.0 * (e0 + en) / eps ** 2 / scale


def mix_lower_bound(chain: BDChain, dist: Optional[StationaryDist] = None,
                    mode: str = "continuous", delta: Optional[float] = None) -> float:
    """Lower bound from the larger passage time to the median.

    Continuous: ``max{E_0 tau_{i0}, E_n tau_{i0}} / 6`` bounds ``T(1/10)``.
    Lazy: the same divided by ``2 (1 - delta)`` bounds ``T_delta(1/20)``.
    """
    scale = _lazy_factor(mode, delta)
    dist = dist if dist is not None else stationary(chain)
    t = max(passage_sums(chain, median(dist)))
    return t / 6.0 if mode == "continuous" else t / (12.0 * scale)
