"""``bdmix`` command-line front end.

Exit codes: 0 success, 1 input error, 2 a bound failed on this input
(an implementation defect, reported with the failing bracket), 3 chain too
large for dense computation.  Floats are printed with 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

from .core import BDChain, stationary
from .cutoff import cutoff_criterion, family_scan, product_criterion
from .distance import (mix_lower_bound, mix_upper_bound, mixing_time, parse_mode,
                       tv_profile_continuous, tv_profile_discrete, tv_profile_lazy)
from .errors import (BDMixError, InsufficientDataError, InvariantViolation, ParseError,
                     SizeError)
from .families import FamilySpec
from .hitting import bounds_report
from .spectral import eigenvalues, gap_mixing_lower


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _dumps(doc) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become strings."""
    def conv(v):
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [conv(x) for x in v]
        if isinstance(v, float):
            return v if math.isfinite(v) else repr(v)
        return v
    return json.dumps(conv(doc), indent=2)


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _load_chain(path: str) -> BDChain:
    return BDChain.from_json(_read_text(path))


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ParseError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_analyze(args, out) -> int:
    chain = _load_chain(args.chain)
    rep = bounds_report(chain, stationary(chain))
    spec = eigenvalues(chain)
    ok = chain.n == 0 or rep.gap_lo * (1 - 1e-12) <= spec.gap <= rep.gap_hi * (1 + 1e-12)
    if args.csv:
        rows = [["key", "value"]]
        for k, v in rep.to_dict().items():
            if isinstance(v, dict):
                rows += [[f"mix_hi({e})", _fmt(x)] for e, x in v.items()]
            else:
                rows.append([k, _fmt(v)])
        rows += [["gap", _fmt(spec.gap)], ["inv_sum", _fmt(spec.inv_sum)]]
        rows += [[f"eig[{k}]", _fmt(x)] for k, x in enumerate(spec.eigs, 1)]
        rows.append(["brackets_hold", str(ok).lower()])
        out.write(_csv(rows))
    else:
        out.write(_dumps({"bounds": rep.to_dict(), "spectrum": spec.to_dict(),
                          "brackets_hold": ok}) + "\n")
    if not ok:
        raise InvariantViolation(f"gap {spec.gap!r} outside [{rep.gap_lo!r}, {rep.gap_hi!r}]")
    return 0


def cmd_eigs(args, out) -> int:
    spec = eigenvalues(_load_chain(args.chain))
    out.write(_csv([["k", "eigenvalue"]] + [[k, _fmt(x)] for k, x in enumerate(spec.eigs, 1)]))
    return 0


def cmd_tv_curve(args, out) -> int:
    chain = _load_chain(args.chain)
    kind, delta = parse_mode(args.mode)
    if kind == "continuous":
        times = _floats(args.times)
    else:
        times = _ints(args.times)
    if not times:
        raise ParseError("time grid is empty")
    if kind == "continuous":
        prof = tv_profile_continuous(chain, times)
    elif kind == "lazy":
        prof = tv_profile_lazy(chain, delta, times)
    else:
        prof = tv_profile_discrete(chain, times)
    out.write(prof.to_csv())
    return 0


def cmd_bounds_check(args, out) -> int:
    """Exact mixing time against the passage-time and gap bounds that apply at ``eps``."""
    chain = _load_chain(args.chain)
    eps = args.eps
    kind, delta = parse_mode(args.mode)
    if kind == "discrete":
        raise ParseError("bounds-check needs --mode continuous or lazy:D")
    dist = stationary(chain)
    mode = "continuous" if kind == "continuous" else "lazy"
    T = mixing_time(chain, eps, mode, delta)
    upper = mix_upper_bound(chain, dist, eps, mode, delta)
    # the passage lower bound is stated at 1/10 (continuous) and 1/20 (lazy)
    lower = None
    if eps <= (0.1 if kind == "continuous" else 0.05):
        lower = mix_lower_bound(chain, dist, mode, delta)
    gap = eigenvalues(chain).gap
    gap_lower = None
    if kind == "continuous" and eps < 0.5:
        gap_lower = gap_mixing_lower(gap, eps)
    # continuous times are resolved to 1e-6/gap from above
    res = 1e-6 / gap if kind == "continuous" else 0.0
    failures = []
    if T > upper * (1 + 1e-12):
        failures.append(f"T={T!r} above upper bound {upper!r}")
    if lower is not None and T < lower * (1 - 1e-12):
        failures.append(f"T={T!r} below passage lower bound {lower!r}")
    if gap_lower is not None and T + res < gap_lower * (1 - 1e-12):
        failures.append(f"T={T!r} below gap lower bound {gap_lower!r}")
    out.write(_dumps({"mode": args.mode, "eps": eps, "T": T, "upper": upper, "lower": lower,
                      "gap_lower": gap_lower, "holds": not failures}) + "\n")
    if failures:
        raise InvariantViolation("; ".join(failures))
    return 0


def cmd_scan(args, out, err) -> int:
    template = FamilySpec.from_json(_read_text(args.family))
    indices = _ints(args.indices)
    if not indices:
        raise InsufficientDataError("index list is empty")
    eps = _floats(args.eps)
    delta = _floats(args.delta) if args.delta else []
    for d in delta:
        if not 0.0 < d < 1.0:
            raise ParseError(f"delta must lie in (0, 1), got {d}")
    scan = family_scan(template, indices, eps, delta, args.exact_limit)
    verdicts = {"cutoff": None, "product": None}
    if len(scan.rows) >= 4:
        verdicts = {"cutoff": cutoff_criterion(scan).to_dict(),
                    "product": product_criterion(scan).to_dict()}
    if args.json:
        doc = json.loads(scan.to_json())
        doc["verdicts"] = verdicts
        out.write(_dumps(doc) + "\n")
    else:
        out.write(scan.to_csv())
        if verdicts["cutoff"] is None:
            err.write("verdicts need at least 4 indices\n")
        else:
            err.write(f"heuristic verdicts: t/ell {verdicts['cutoff']['verdict']}, "
                      f"s*gap {verdicts['product']['verdict']}\n")
    if scan.violations:
        raise InvariantViolation("; ".join(f"n={n}: {v}" for n, v in scan.violations))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bdmix", description="Gap and mixing bounds for birth-death chains.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="hitting constants, Hardy constants and spectrum")
    a.add_argument("--chain", required=True, metavar="FILE")
    fmt = a.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--csv", action="store_true", help="key,value CSV output")

    e = sub.add_parser("eigs", help="nonzero eigenvalues of I - K")
    e.add_argument("--chain", required=True, metavar="FILE")

    t = sub.add_parser("tv-curve", help="exact worst-case TV distance on a time grid")
    t.add_argument("--chain", required=True, metavar="FILE")
    t.add_argument("--mode", required=True, help="discrete, lazy:D or continuous")
    t.add_argument("--times", required=True, help="comma-separated ascending times")

    b = sub.add_parser("bounds-check", help="exact mixing time against its bounds")
    b.add_argument("--chain", required=True, metavar="FILE")
    b.add_argument("--eps", required=True, type=float)
    b.add_argument("--mode", required=True, help="continuous or lazy:D")

    s = sub.add_parser("scan", help="diagnostics over a family index list")
    s.add_argument("--family", required=True, metavar="FILE")
    s.add_argument("--indices", required=True, help="comma-separated ascending indices")
    s.add_argument("--eps", required=True, help="threshold, or comma-separated thresholds")
    s.add_argument("--delta", default="", help="holding probability, or comma-separated list")
    s.add_argument("--exact-limit", type=int, default=512, metavar="N")
    s.add_argument("--json", action="store_true", help="JSON output with verdicts")
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    handlers = {"analyze": cmd_analyze, "eigs": cmd_eigs, "tv-curve": cmd_tv_curve,
                "bounds-check": cmd_bounds_check}
    try:
        if args.command == "scan":
            return cmd_scan(args, out, err)
        return handlers[args.command](args, out)
    except SizeError as exc:
        err.write(f"error: {exc}\n")
        return 3
    except InvariantViolation as exc:
        err.write(f"bound violated: {exc}\n")
        return 2
    except (BDMixError, ValueError, TypeError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
