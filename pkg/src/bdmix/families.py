"""Parameterised chain families and their closed-form scan constants.

Every builder returns a validated :class:`~bdmix.core.BDChain` on
``{0, ..., N}``.  Chains naturally indexed by ``{-n, ..., n}`` are shifted by
``n``.  A :class:`FamilySpec` names a builder, an index ``n`` and a parameter
record, and round-trips through JSON so that the CLI can scan a family over
a list of indices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import _backend
from .core import BDChain, StationaryDist, from_rates, lazy
from .errors import ShapeError, SpecError, SymmetryError

SHAPE_TOL = 1e-12
UNIFORM_RTOL = 1e-10


# -- builders ----------------------------------------------------------------

def simple_walk(n: int) -> BDChain:
    """``p_i = q_{i+1} = 1/2``, holding 1/2 at both ends."""
    _need(n >= 1, "simple_walk needs n >= 1")
    return from_rates(np.full(n, 0.5), np.full(n, 0.5))


def ehrenfest(n: int) -> BDChain:
    """``p_i = 1 - i/n``, ``q_i = i/n``; binomial stationary law."""
    _need(n >= 1, "ehrenfest needs n >= 1")
    i = np.arange(n + 1)
    return BDChain(1.0 - i / n, i / n)


def precut(n: int, eps: float) -> BDChain:
    """Simple walk whose middle edge ``(M, M+1)``, ``M = floor(n/2)``, has rate ``eps``.

    The two ends hold with probability 1/2 and the bottleneck endpoints with
    ``1/2 - eps``.
    """
    _need(n >= 3, "precut needs n >= 3")
    _need(0.0 < eps <= 0.5, f"precut rate must lie in (0, 1/2], got {eps}")
    up = np.full(n, 0.5)
    up[n // 2] = eps
    return from_rates(up, up)


def plateau_chain(states: int = 100, rate: float = 1e-3) -> BDChain:
    """The 1/2-lazy bottleneck walk with ``states`` states and edge rate ``rate`` in the middle.

    Off the bottleneck it moves to each neighbour with probability 1/4; the
    middle edge is crossed with probability ``rate`` from either side.
    """
    return lazy(precut(states - 1, 2.0 * rate), 0.5)


def bottleneck(n: int, positions: Sequence[int], eps) -> BDChain:
    """Simple walk with slow edges: ``p_{x-1} = q_x = eps_j`` for each position ``x = x_j``."""
    xs, es = _bottleneck_args(n, positions, eps)
    up = np.full(n, 0.5)
    for x, e in zip(xs, es):
        up[x - 1] = e
    return from_rates(up, up)


def _bottleneck_args(n, positions, eps):
    xs = [int(x) for x in positions]
    es = np.broadcast_to(np.asarray(eps, dtype=float), (len(xs),)).copy()
    _need(len(set(xs)) == len(xs), f"bottleneck positions must be distinct, got {xs}")
    _need(all(1 <= x <= n for x in xs), f"bottleneck positions must lie in 1..{n}, got {xs}")
    _need(bool(np.all((es > 0) & (es <= 0.5))), "bottleneck rates must lie in (0, 1/2]")
    return xs, es


def metropolis(logw) -> BDChain:
    """Metropolis chain of the simple walk for the target ``exp(logw)`` (unnormalised).

    ``p_i = min(1, pi(i+1)/pi(i)) / 2`` and ``q_i = min(1, pi(i-1)/pi(i)) / 2``.
    """
    logw = np.asarray(logw, dtype=float)
    _need(logw.size >= 2 and bool(np.all(np.isfinite(logw))), "need at least two finite log-weights")
    step = np.diff(logw)
    up = 0.5 * np.exp(np.minimum(step, 0.0))
    down = 0.5 * np.exp(np.minimum(-step, 0.0))
    return from_rates(up, down)


def is_valley(logw, j: int, tol: float = SHAPE_TOL) -> bool:
    """Whether ``pi`` is non-increasing on ``[0, j]`` and non-decreasing on ``[j, n]``."""
    step = np.diff(np.asarray(logw, dtype=float))
    return bool(np.all(step[:j] <= tol) and np.all(step[j:] >= -tol))


def metropolis_valley(logw, j: int) -> BDChain:
    """Metropolis chain for a valley-shaped target with bottom ``j``, written edge by edge.

    Left of ``j`` the chain steps down with probability 1/2 and up with
    ``pi(i+1)/(2 pi(i))``; right of ``j`` mirror-wise; at ``j`` both moves
    have probability 1/2.  Holding is whatever remains of each row.
    """
    logw = np.asarray(logw, dtype=float)
    n = logw.size - 1
    _need(0 <= j <= n, f"valley index must lie in 0..{n}")
    _need(is_valley(logw, j), "target is not a valley at the given index")
    step = np.diff(logw)
    up = np.where(np.arange(n) < j, 0.5 * np.exp(np.minimum(step, 0.0)), 0.5)
    down = np.where(np.arange(1, n + 1) <= j, 0.5, 0.5 * np.exp(np.minimum(-step, 0.0)))
    return from_rates(up, down)


def check_logweights(n: int, a: float) -> np.ndarray:
    """``log (|i| + 1)^a`` for ``i = -n..n``."""
    i = np.arange(-n, n + 1)
    return a * np.log(np.abs(i) + 1.0)


def hat_logweights(n: int, a: float) -> np.ndarray:
    """``log (n - |i| + 1)^a`` for ``i = -n..n``."""
    i = np.arange(-n, n + 1)
    return a * np.log(n - np.abs(i) + 1.0)


def metropolis_check(n: int, a: float) -> BDChain:
    _need(n >= 1 and a > 0, "check measure needs n >= 1 and a > 0")
    return metropolis(check_logweights(n, a))


def metropolis_hat(n: int, a: float) -> BDChain:
    _need(n >= 1 and a > 0, "hat measure needs n >= 1 and a > 0")
    return metropolis(hat_logweights(n, a))


def monotone_logweights(n: int, case: int, alpha: float, beta: float) -> np.ndarray:
    """``log f`` at ``x = 0..n`` for the four increasing weight shapes.

    Cases 1 and 2 use ``f(x) = exp(alpha x^beta)`` with ``beta >= 1`` and
    ``0 < beta < 1`` respectively; cases 3 and 4 use
    ``f(x) = exp(alpha log(x+1)^beta)`` with ``beta > 1`` and ``beta <= 1``.
    """
    x = np.arange(n + 1, dtype=float)
    if case == 1:
        _need(alpha > 0 and beta >= 1, "case 1 needs alpha > 0 and beta >= 1")
        return alpha * x ** beta
    if case == 2:
        _need(alpha > 0 and 0 < beta < 1, "case 2 needs alpha > 0 and 0 < beta < 1")
        return alpha * x ** beta
    if case == 3:
        _need(alpha > 0 and beta > 1, "case 3 needs alpha > 0 and beta > 1")
        return alpha * np.log1p(x) ** beta
    if case == 4:
        _need(alpha >= 0 and 0 < beta <= 1, "case 4 needs alpha >= 0 and 0 < beta <= 1")
        return alpha * np.log1p(x) ** beta
    raise SpecError(f"monotone weight case must be 1..4, got {case}")


def monotone_split(n: int, case: int, beta: float) -> int:
    """The split state used with each monotone weight shape."""
    if case == 1:
        return n
    if case == 2:
        return int(math.floor(n - n ** (1.0 - beta)))
    if case == 3:
        return int(math.floor(n * (1.0 - math.log(n) ** (1.0 - beta)))) if n > 1 else 0
    return n // 2


def monotone_weight(n: int, case: int, alpha: float, beta: float) -> BDChain:
    _need(n >= 1, "monotone_weight needs n >= 1")
    return metropolis(monotone_logweights(n, case, alpha, beta))


def alternating(n: int) -> BDChain:
    """Walk on ``{0..2n}`` with edge rate 1/2 from even states and ``1/(2n)`` from odd ones."""
    _need(n >= 1, "alternating needs n >= 1")
    rates = np.where(np.arange(2 * n) % 2 == 0, 0.5, 0.5 / n)
    return from_rates(rates, rates)


def random_chain(n: int, rng: np.random.Generator, lo: float = 1e-4, hi: float = 0.5) -> BDChain:
    """Chain with every birth and death rate drawn log-uniformly from ``[lo, hi]``."""
    _need(0 < lo <= hi <= 0.5, "rates must satisfy 0 < lo <= hi <= 1/2")
    up = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    down = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    return from_rates(up, down)


def is_uniform_symmetric(chain: BDChain, rtol: float = UNIFORM_RTOL) -> bool:
    """Whether ``p_i p_{n-i-1} = q_{i+1} q_{n-i}`` for ``0 <= i <= n/2``, i.e. ``pi`` is symmetric."""
    n = chain.n
    i = np.arange(0, n // 2 + 1)
    i = i[i <= n - 1]
    lhs = chain.p[i] * chain.p[n - i - 1]
    rhs = chain.q[i + 1] * chain.q[n - i]
    return bool(np.all(np.abs(lhs - rhs) <= rtol * np.maximum(lhs, rhs)))


def perturb_uniform2(chain: BDChain, edges: Sequence[int], coef) -> BDChain:
    """Slow down the edges in ``edges`` toward ``min{p_i, q_{n-i}}`` keeping ``pi`` fixed.

    ``p~_i = c_i p_i + (1 - c_i) min{p_i, q_{n-i}}`` and
    ``q~_{i+1} = q_{i+1} p~_i / p_i`` for ``i`` in ``edges``; other edges are
    unchanged.
    """
    if not is_uniform_symmetric(chain):
        raise SymmetryError("need p_i p_(n-i-1) = q_(i+1) q_(n-i) for the perturbation")
    n = chain.n
    edges = np.asarray(list(edges), dtype=int)
    coef = np.broadcast_to(np.asarray(coef, dtype=float), edges.shape)
    _need(bool(np.all((edges >= 0) & (edges < n))), f"edges must lie in 0..{n - 1}")
    _need(bool(np.all((coef >= 0) & (coef <= 1))), "coefficients must lie in [0, 1]")
    up = chain.p[:-1].copy()
    down = chain.q[1:].copy()
    for i, c in zip(edges, coef):
        new = c * chain.p[i] + (1.0 - c) * min(chain.p[i], chain.q[n - i])
        down[i] = chain.q[i + 1] * new / chain.p[i]
        up[i] = new
    return from_rates(up, down)


# -- closed-form constants ---------------------------------------------------

@dataclass(frozen=True)
class BottleneckConstants:
    t: float
    ell: float
    a: float
    b: float


def bottleneck_constants(n: int, positions: Sequence[int], eps) -> BottleneckConstants:
    """Closed-form hitting constants of the slow-edge walk.

    ``t = n^2 + sum_i min{x_i, n+1-x_i} / eps_i``;
    ``ell = n^2 + max_{j <= n/2} sum_{i : |x_i - n/2| <= j} (n/2 + 1 - j) / eps_i``;
    ``a = sum_i min{x_i, n+1-x_i}``;
    ``b = max_{j <= n/2} (j+1) #{i : j < x_i <= n-j}``.
    """
    xs, es = _bottleneck_args(n, positions, eps)
    xs = np.asarray(xs, dtype=float)
    near = np.minimum(xs, n + 1 - xs)
    t = n * n + math.fsum(near / es)
    js = np.arange(0, n // 2 + 1)
    inner = [math.fsum((n / 2 + 1 - j) / es[np.abs(xs - n / 2) <= j]) for j in js]
    ell = n * n + (max(inner) if inner else 0.0)
    b = max(((j + 1) * int(np.sum((xs > j) & (xs <= n - j))) for j in js), default=0)
    return BottleneckConstants(t=t, ell=ell, a=float(near.sum()), b=float(b))


def _inv_mass_sum(dist: StationaryDist, lo: int, hi: int) -> float:
    """``sum_{k=lo}^{hi} 1/pi(k)`` from log-weights, so tiny masses do not overflow early."""
    if hi < lo:
        return 0.0
    logz = logsumexp(dist.logw)
    return float(np.exp(logz + logsumexp(-dist.logw[lo:hi + 1])))


def valley_constant(chain: BDChain, dist: StationaryDist, j: int) -> float:
    """``max{ sum_{i<=j} 1/pi(i) / q_j , sum_{i>=j} 1/pi(i) / p_j }`` for a valley at ``j``.

    A side whose rate vanishes (``j = 0`` on the left, ``j = n`` on the
    right) contributes 0.
    """
    if not is_valley(dist.logw, j):
        raise ShapeError(f"stationary law is not a valley at {j}")
    if not (np.all(chain.p[:j] <= chain.q[1:j + 1] + SHAPE_TOL)
            and np.all(chain.p[j:-1] >= chain.q[j + 1:] - SHAPE_TOL)):
        raise ShapeError(f"rates do not satisfy the valley ordering at {j}")
    left = _inv_mass_sum(dist, 0, j) / chain.q[j] if j > 0 else 0.0
    right = _inv_mass_sum(dist, j, chain.n) / chain.p[j] if j < chain.n else 0.0
    return max(left, right)


@dataclass(frozen=True)
class MonoConstants:
    u: float
    v: float
    w: float


def mono_constants(chain: BDChain, dist: StationaryDist, j: int) -> MonoConstants:
    """``u = sum_{k<j} pi([0,k])/pi(k)``, ``v = max_{i<j} sum_{k=i}^{j-1} pi([0,i])/pi(k)``,
    ``w = sum_{k>=j} 1/pi(k)`` for chains with ``p_i >= q_{i+1}``.
    """
    if not np.all(chain.p[:-1] >= chain.q[1:] - SHAPE_TOL):
        raise ShapeError("need p_i >= q_(i+1) for every edge")
    n = chain.n
    if n == 0:
        return MonoConstants(0.0, 0.0, 0.0)
    L, _ = _backend.kernels.passage_ratios(chain.p, chain.q)
    L = np.asarray(L)
    u = math.fsum(L[:j])
    v = 0.0
    if j > 0:
        s = L[j - 1]
        v = s
        for i in range(j - 2, -1, -1):
            s = L[i] + (L[i] * chain.q[i + 1] / (chain.p[i] * L[i + 1])) * s
            v = max(v, s)
    w = _inv_mass_sum(dist, j, n)
    return MonoConstants(u=u, v=float(v), w=w)


# -- specs -------------------------------------------------------------------

KINDS = ("simple_walk", "ehrenfest", "metropolis_valley", "metropolis_check",
         "metropolis_hat", "bottleneck", "precut", "monotone_weight", "alternating")


@dataclass(frozen=True)
class FamilySpec:
    """A family member: builder ``kind``, index ``n`` and parameters.

    Parameters by kind
    ------------------
    precut : ``eps`` and optional ``eps_power`` (rate ``eps * n^-eps_power``).
    bottleneck : ``positions`` (integers, or fractions of ``n`` in (0, 1)),
        ``eps`` (scalar or per position) and optional ``eps_power``.
    metropolis_valley : ``logw`` (or ``weights``) and ``valley``.
    metropolis_check, metropolis_hat : ``a``.
    monotone_weight : ``case``, ``alpha``, ``beta``.
    Any kind : optional ``lazy`` holding probability applied last.
    """

    kind: str
    n: int
    params: dict = field(default_factory=dict)

    def with_n(self, n: int) -> "FamilySpec":
        return replace(self, n=int(n))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": self.params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "FamilySpec":
        if "kind" not in doc:
            raise SpecError("family document needs a 'kind'")
        return cls(doc["kind"], int(doc.get("n", 0)), dict(doc.get("params", {})))

    @classmethod
    def from_json(cls, text: str) -> "FamilySpec":
        return cls.from_dict(json.loads(text))


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise SpecError(msg)


def _scaled_eps(spec: FamilySpec):
    eps = spec.params.get("eps")
    _need(eps is not None, f"{spec.kind} needs 'eps'")
    power = float(spec.params.get("eps_power", 0.0))
    return np.asarray(eps, dtype=float) * float(spec.n) ** (-power)


def resolve_positions(n: int, positions) -> list:
    """Integers stay as given; fractions in (0, 1) become ``max(1, floor(f n))``."""
    out = []
    for x in positions:
        if isinstance(x, float) and 0.0 < x < 1.0:
            out.append(max(1, int(math.floor(x * n))))
        else:
            out.append(int(x))
    return out


def build(spec: FamilySpec) -> BDChain:
    """Instantiate ``spec``; raises :class:`SpecError` naming the violated constraint."""
    k, n, pr = spec.kind, spec.n, spec.params
    if k == "simple_walk":
        chain = simple_walk(n)
    elif k == "ehrenfest":
        chain = ehrenfest(n)
    elif k == "precut":
        chain = precut(n, float(_scaled_eps(spec)))
    elif k == "bottleneck":
        _need("positions" in pr, "bottleneck needs 'positions'")
        chain = bottleneck(n, resolve_positions(n, pr["positions"]), _scaled_eps(spec))
    elif k == "metropolis_valley":
        logw = _valley_logw(pr)
        _need(logw.size == n + 1, f"valley target has {logw.size} entries, expected n+1 = {n + 1}")
        chain = metropolis_valley(logw, int(pr.get("valley", int(np.argmin(logw)))))
    elif k == "metropolis_check":
        chain = metropolis_check(n, float(pr.get("a", 1.0)))
    elif k == "metropolis_hat":
        chain = metropolis_hat(n, float(pr.get("a", 1.0)))
    elif k == "monotone_weight":
        _need(all(key in pr for key in ("case", "alpha", "beta")),
              "monotone_weight needs 'case', 'alpha' and 'beta'")
        chain = monotone_weight(n, int(pr["case"]), float(pr["alpha"]), float(pr["beta"]))
    elif k == "alternating":
        chain = alternating(n)
    else:
        raise SpecError(f"unknown family kind {k!r}; expected one of {', '.join(KINDS)}")
    if pr.get("lazy") is not None:
        delta = float(pr["lazy"])
        _need(0.0 <= delta < 1.0, f"lazy holding must lie in [0, 1), got {delta}")
        chain = lazy(chain, delta)
    return chain


def _valley_logw(pr: dict) -> np.ndarray:
    if "logw" in pr:
        return np.asarray(pr["logw"], dtype=float)
    _need("weights" in pr, "metropolis_valley needs 'logw' or 'weights'")
    w = np.asarray(pr["weights"], dtype=float)
    _need(bool(np.all(w > 0)), "valley weights must be positive")
    return np.log(w)


def spec_constants(spec: FamilySpec) -> Optional[dict]:
    """Closed-form constants for kinds that have them, else ``None``."""
    if spec.kind == "bottleneck":
        c = bottleneck_constants(spec.n, resolve_positions(spec.n, spec.params["positions"]),
                                 _scaled_eps(spec))
        return {"t": c.t, "ell": c.ell, "a": c.a, "b": c.b}
    return None
