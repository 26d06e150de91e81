"""Scans of a chain family over its index and the finite-sample cutoff verdicts.

A scan row holds, for one index ``n``: the hitting constant ``t`` (larger
expected passage time to the median), the path Hardy constant ``ell``, the
spectral gap, the sum of inverse nonzero eigenvalues ``s`` and, when the
chain is small enough, exact mixing times in continuous time and for lazy
versions of the chain.

CSV column order
----------------
``n, t, ell, gap, s, ratio_t_over_ell, product_s_gap, product_T_gap``, then
one ``Tc(<eps>)`` column per threshold, then one ``Tlazy<delta>(<eps>)``
column per (holding, threshold) pair, then ``violations`` (semicolon
separated).  Missing exact columns are empty.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import median, stationary
from .distance import mixing_times
from .errors import InsufficientDataError, SpecError
from .families import FamilySpec, build
from .hitting import ell_sides, passage_sums
from .spectral import eigenvalues

BRACKET_SLACK = 1e-12
GROWTH_FACTOR = 2.0
DIP_TOLERANCE = 0.9
BOUNDED_FACTOR = 2.0
MIN_ROWS = 4
CHECK_EPS = 0.1
DEFAULT_EXACT_LIMIT = 512
_BASE = ("n", "t", "ell", "gap", "s", "ratio_t_over_ell", "product_s_gap", "product_T_gap")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _tc_col(eps: float) -> str:
    return f"Tc({eps!r})"


def _tl_col(delta: float, eps: float) -> str:
    return f"Tlazy{delta!r}({eps!r})"


@dataclass(frozen=True)
class FamilyScan:
    """Per-index diagnostics of a family; ``rows`` are dicts keyed by :attr:`columns`."""

    kind: str
    eps: tuple
    delta: tuple
    rows: tuple = field(default=())

    @property
    def columns(self) -> list:
        cols = list(_BASE) + [_tc_col(e) for e in self.eps]
        cols += [_tl_col(d, e) for d in self.delta for e in self.eps]
        return cols + ["violations"]

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if r[name] is None else r[name] for r in self.rows], dtype=float)

    @property
    def violations(self) -> list:
        return [(r["n"], v) for r in self.rows for v in r["violations"]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = self.columns
        w.writerow(cols)
        for r in self.rows:
            w.writerow([";".join(r[c]) if c == "violations" else _fmt(r[c]) for c in cols])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str = "") -> "FamilyScan":
        lines = list(csv.reader(io.StringIO(text)))
        if not lines:
            raise ValueError("empty scan CSV")
        head = lines[0]
        if tuple(head[:len(_BASE)]) != _BASE or head[-1] != "violations":
            raise ValueError("unexpected scan CSV header")
        eps = tuple(float(c[3:-1]) for c in head if c.startswith("Tc("))
        delta = []
        for c in head:
            if c.startswith("Tlazy"):
                d = float(c[5:c.index("(")])
                if d not in delta:
                    delta.append(d)
        rows = []
        for line in lines[1:]:
            row = {}
            for c, v in zip(head, line):
                if c == "violations":
                    row[c] = v.split(";") if v else []
                elif c == "n":
                    row[c] = int(v)
                elif v == "":
                    row[c] = None
                elif c.startswith("Tlazy"):
                    row[c] = int(v)
                else:
                    row[c] = float(v)
            rows.append(row)
        return cls(kind, eps, tuple(delta), tuple(rows))

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "eps": list(self.eps), "delta": list(self.delta),
                           "columns": self.columns, "rows": list(self.rows)})

    @classmethod
    def from_json(cls, text: str) -> "FamilyScan":
        doc = json.loads(text)
        rows = tuple({c: r[c] for c in doc["columns"]} for r in doc["rows"])
        return cls(doc["kind"], tuple(doc["eps"]), tuple(doc["delta"]), rows)

    def __eq__(self, other):
        if not isinstance(other, FamilyScan):
            return NotImplemented
        return (self.eps == other.eps and self.delta == other.delta
                and list(self.rows) == list(other.rows))


def scan_row(chain, eps: Sequence[float], delta: Sequence[float], exact: bool) -> dict:
    """Diagnostics for a single chain; bracket failures are listed under ``violations``."""
    dist = stationary(chain)
    i0 = median(dist)
    t = max(passage_sums(chain, i0))
    ell = max(ell_sides(chain, i0))
    spec = eigenvalues(chain)
    gap, s = spec.gap, spec.inv_sum
    row = {"n": chain.n, "t": t, "ell": ell, "gap": gap, "s": s,
           "ratio_t_over_ell": t / ell if ell > 0 else None,
           "product_s_gap": s * gap}
    bad = []
    if not (1.0 / (4.0 * ell) * (1 - BRACKET_SLACK) <= gap <= 2.0 / ell * (1 + BRACKET_SLACK)):
        bad.append(f"gap {gap!r} outside [1/(4 ell), 2/ell] with ell={ell!r}")
    tc = [None] * len(eps)
    tl = {d: [None] * len(eps) for d in delta}
    if exact:
        wanted = sorted(set(eps) | {CHECK_EPS})
        got = dict(zip(wanted, mixing_times(chain, wanted, "continuous")))
        tc = [got[e] for e in eps]
        if got[CHECK_EPS] < t / 6.0 * (1 - BRACKET_SLACK):
            bad.append(f"Tc(0.1) = {got[CHECK_EPS]!r} below t/6 = {t / 6.0!r}")
        for e in wanted:
            if got[e] > 18.0 * t / e ** 2 * (1 + BRACKET_SLACK):
                bad.append(f"Tc({e!r}) = {got[e]!r} above 18 t/eps^2 = {18.0 * t / e ** 2!r}")
        for d in delta:
            tl[d] = mixing_times(chain, eps, "lazy", d)
    row["product_T_gap"] = tc[0] * gap if eps and tc[0] is not None else None
    for e, v in zip(eps, tc):
        row[_tc_col(e)] = v
    for d in delta:
        for e, v in zip(eps, tl[d]):
            row[_tl_col(d, e)] = v
    row["violations"] = bad
    return row


def family_scan(template: FamilySpec, indices: Sequence[int], eps: Sequence[float] = (0.25,),
                delta: Sequence[float] = (), exact_limit: int = DEFAULT_EXACT_LIMIT) -> FamilyScan:
    """Scan ``template`` over ascending ``indices``.

    Exact mixing-time columns are filled only for chains with at most
    ``exact_limit`` + 1 states; ``product_T_gap`` uses the first threshold.
    Bracket failures do not raise; they are collected per row.
    """
    idx = [int(n) for n in indices]
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise SpecError(f"indices must be strictly ascending, got {idx}")
    eps = tuple(float(e) for e in eps)
    delta = tuple(float(d) for d in delta)
    rows = []
    for n in idx:
        chain = build(template.with_n(n))
        rows.append(scan_row(chain, eps, delta, chain.n <= exact_limit))
    return FamilyScan(template.kind, eps, delta, tuple(rows))


@dataclass(frozen=True)
class Verdict:
    """Finite-sample trend of a diagnostic sequence; a heuristic, not a limit statement.

    ``growing``: the last value is at least twice the first and no step
    drops below 90% of its predecessor.  ``bounded``: max/min is at most 2.
    Anything else is ``inconclusive``.
    """

    quantity: str
    indices: tuple
    values: tuple
    growth: float
    last_window: float
    verdict: str
    heuristic: bool = True

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "indices": list(self.indices),
                "values": list(self.values), "growth": self.growth,
                "last_window": self.last_window, "verdict": self.verdict,
                "heuristic": self.heuristic}


def trend_verdict(values: Sequence[float]) -> str:
    v = np.asarray(values, dtype=float)
    if v.size < MIN_ROWS:
        raise InsufficientDataError(f"need at least {MIN_ROWS} values, got {v.size}")
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        return "inconclusive"
    if v[-1] >= GROWTH_FACTOR * v[0] and np.all(v[1:] >= DIP_TOLERANCE * v[:-1]):
        return "growing"
    if v.max() <= BOUNDED_FACTOR * v.min():
        return "bounded"
    return "inconclusive"


def _verdict(scan: FamilyScan, col: str) -> Verdict:
    if len(scan.rows) < MIN_ROWS:
        raise InsufficientDataError(f"need at least {MIN_ROWS} scan rows, got {len(scan.rows)}")
    vals = scan.column(col)
    return Verdict(col, tuple(r["n"] for r in scan.rows), tuple(float(x) for x in vals),
                   float(vals[-1] / vals[0]), float(vals[-1] / vals[-2]), trend_verdict(vals))


def cutoff_criterion(scan: FamilyScan) -> Verdict:
    """Trend of ``t_n / ell_n``; growth suggests cutoff, boundedness its absence."""
    return _verdict(scan, "ratio_t_over_ell")


@dataclass(frozen=True)
class ProductVerdict:
    s_gap: Verdict
    T_gap: Optional[Verdict]

    @property
    def verdict(self) -> str:
        return self.s_gap.verdict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "s_gap": self.s_gap.to_dict(),
                "T_gap": None if self.T_gap is None else self.T_gap.to_dict()}


def product_criterion(scan: FamilyScan) -> ProductVerdict:
    """Trends of ``s_n gap_n`` and ``T_n gap_n``; the overall verdict is the ``s`` one.

    The ``T`` trend is omitted when some row has no exact mixing time.
    """
    s_gap = _verdict(scan, "product_s_gap")
    tg = scan.column("product_T_gap") if scan.rows else np.array([])
    T_gap = _verdict(scan, "product_T_gap") if tg.size and np.all(np.isfinite(tg)) else None
    return ProductVerdict(s_gap, T_gap)


def mixing_bracket_warning(scan: FamilyScan, lo: float = 2 * math.log(2) / 5 - 0.15,
                           hi: float = 2.15) -> Optional[str]:
    """Check ``lo <= Tc(0.1)/t <= hi`` at the largest index; returns (and warns) a message on failure.

    Intended for families whose cutoff verdict is ``growing``; the outcome is
    informational only.
    """
    col = _tc_col(CHECK_EPS)
    if not scan.rows or col not in scan.rows[-1] or scan.rows[-1][col] is None:
        return None
    r = scan.rows[-1]
    ratio = r[col] / r["t"]
    if lo <= ratio <= hi:
        return None
    msg = f"Tc(0.1)/t = {ratio:.4g} at n={r['n']} outside [{lo:.4g}, {hi:.4g}]"
    warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return msg
