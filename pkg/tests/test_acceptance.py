"""Headline acceptance criteria, one test each.

Every test records a ``PASS [k] ...`` or ``FAIL [k] ...`` line (shown in the
terminal summary) and then asserts the criterion with its stated tolerance.
"""
import logging
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from bdmix.core import median, stationary
from bdmix.cutoff import cutoff_criterion, family_scan, product_criterion
from bdmix.distance import (mix_lower_bound, mix_upper_bound, mixing_times, passage_survival,
                            tv_profile_continuous)
from bdmix.errors import AccuracyError
from bdmix.families import FamilySpec, ehrenfest, plateau_chain
from bdmix.hitting import (chain_weights, ell_constant, expected_passage, hardy_B, hardy_C,
                           passage_sums)
from bdmix.spectral import eigenvalues, gap_mixing_lower, spectral_gap

from . import oracles
from .conftest import ACCEPTANCE_LINES, random_chain

pytestmark = pytest.mark.acceptance
log = logging.getLogger(__name__)

SLACK = 1e-12
SCAN_SIZES = [16, 32, 64, 128, 256]


def report(k, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} [{k}] {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def corpus(seed, count, n_lo, n_hi):
    """Chains with ``n`` uniform in ``[n_lo, n_hi]`` and rates log-uniform in ``[1e-4, 1/2]``."""
    rng = np.random.default_rng(seed)
    return [random_chain(rng, int(rng.integers(n_lo, n_hi + 1)), 1e-4, 0.5) for _ in range(count)]


@pytest.fixture(scope="module")
def gap_corpus():
    return corpus(20240601, 1000, 2, 300)


@pytest.fixture(scope="module")
def mixing_corpus():
    """Chains of criterion 4 with their exact mixing times (continuous and lazy 1/2)."""
    chains = corpus(7, 200, 1, 100)
    start = time.perf_counter()
    cont = [mixing_times(c, [0.05, 0.1, 0.25]) for c in chains]
    lazy = [mixing_times(c, [0.05, 0.1, 0.25], "lazy", 0.5) for c in chains]
    return chains, cont, lazy, time.perf_counter() - start


def test_ehrenfest_spectrum():
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 4, 8, 16, 32, 64):
        eigs = eigenvalues(ehrenfest(n)).eigs
        worst = max(worst, float(np.max(np.abs(eigs - 2 * np.arange(1, n + 1) / n))))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-10 and elapsed < 1.0,
           f"Ehrenfest spectrum: max abs error {worst:.2e} (limit 1e-10), {elapsed:.3f} s (limit 1 s)")


def test_gap_bracket(gap_corpus):
    start = time.perf_counter()
    bad = []
    for k, c in enumerate(gap_corpus):
        d = stationary(c)
        ell = ell_constant(c, d, median(d))
        gap = spectral_gap(c)
        if not (1 / (4 * ell) * (1 - SLACK) <= gap <= 2 / ell * (1 + SLACK)):
            bad.append(k)
    elapsed = time.perf_counter() - start
    report(2, not bad and elapsed < 30.0,
           f"gap in [1/(4 ell), 2/ell]: {len(bad)} violations over {len(gap_corpus)} chains, "
           f"{elapsed:.2f} s (limit 30 s)")


def test_hardy_bracket_every_state(gap_corpus):
    bad = checked = 0
    for c in gap_corpus:
        if c.n > 100:
            continue
        d = stationary(c)
        nu = chain_weights(c, d)
        gap = spectral_gap(c)
        for m in range(c.n + 1):
            C = hardy_C(d, nu, m)
            hi = 1 / (min(d.prefix[m], d.suffix[m]) * C)
            checked += 1
            if not (1 / (4 * C) * (1 - SLACK) <= gap <= hi * (1 + SLACK)):
                bad += 1
    report(3, bad == 0, f"Hardy bracket at every state: {bad} violations over {checked} (chain, m) pairs")


def test_mixing_sandwich(mixing_corpus):
    chains, cont, lazy, elapsed = mixing_corpus
    start = time.perf_counter()
    bad = []
    for k, c in enumerate(chains):
        d = stationary(c)
        t = max(passage_sums(c, median(d)))
        if cont[k][1] < mix_lower_bound(c, d) * (1 - SLACK):
            bad.append((k, "continuous lower"))
        if lazy[k][0] < mix_lower_bound(c, d, "lazy", 0.5) * (1 - SLACK):
            bad.append((k, "lazy lower"))
        assert mix_lower_bound(c, d) == pytest.approx(t / 6, rel=1e-15)
        for j, eps in enumerate((0.05, 0.1, 0.25)):
            if cont[k][j] > mix_upper_bound(c, d, eps) * (1 + SLACK):
                bad.append((k, f"continuous upper {eps}"))
            if lazy[k][j] > mix_upper_bound(c, d, eps, "lazy", 0.5) * (1 + SLACK):
                bad.append((k, f"lazy upper {eps}"))
    elapsed += time.perf_counter() - start
    report(4, not bad and elapsed < 120.0,
           f"mixing sandwich (continuous and lazy 1/2): {len(bad)} violations over {len(chains)} "
           f"chains, {elapsed:.2f} s (limit 120 s)")


def test_passage_law():
    chains = corpus(5, 200, 1, 60)
    elapsed = 0.0
    cases = refused = 0
    worst = 0.0
    for c in chains:
        K = oracles.kernel(c.p, c.q, c.r)
        for i in range(1, c.n + 1):
            mean = expected_passage(c, None, 0, i)
            for mode in ("continuous", "discrete"):
                ts = [0.0, 0.1 * mean, mean, 3 * mean]
                if mode == "discrete":
                    ts = [float(round(x)) for x in ts]
                cases += 1
                start = time.perf_counter()
                try:
                    got = passage_survival(c, i, ts, mode)
                except AccuracyError as exc:
                    elapsed += time.perf_counter() - start
                    refused += 1
                    log.warning("AccuracyError n=%d i=%d mode=%s: %s", c.n, i, mode, exc)
                    continue
                elapsed += time.perf_counter() - start
                ref = [oracles.survival_oracle(K, i, t, mode) for t in ts]
                worst = max(worst, float(np.max(np.abs(np.asarray(got) - ref))))
    ok = worst <= 1e-9 and refused <= 0.01 * cases and elapsed < 60.0
    report(5, ok, f"survival eigenvalue sum vs absorbed-chain powers: max abs error {worst:.2e} "
           f"(limit 1e-9), {refused}/{cases} AccuracyError (limit 1%), {elapsed:.2f} s (limit 60 s)")


def test_hardy_sandwich():
    rng = np.random.default_rng(12)
    bad = 0
    for _ in range(500):
        n = int(rng.integers(1, 13))
        mu = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), n))
        pi = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), n))
        B, A = hardy_B(mu, pi), oracles.hardy_A(mu, pi)
        if not (B * (1 - 1e-9) <= A <= 4 * B * (1 + 1e-9)):
            bad += 1
    report(6, bad == 0, f"B <= A <= 4B: {bad} violations over 500 weight pairs")


def test_precutoff_plateau():
    start = time.perf_counter()
    prof = tv_profile_continuous(plateau_chain(100, 1e-3), [1e4, 1e5])
    elapsed = time.perf_counter() - start
    d4, d5 = prof.values
    ok = 0.40 <= d4 <= 0.60 and 0.40 <= d5 <= 0.60 and elapsed < 30.0
    report(7, ok, f"plateau: d(1e4) = {d4:.4f}, d(1e5) = {d5:.4f} (both required in [0.40, 0.60]), "
           f"{elapsed:.2f} s (limit 30 s)")


def test_gap_lower_bound(mixing_corpus):
    chains, cont, _, _ = mixing_corpus
    bad = 0
    for k, c in enumerate(chains):
        gap = spectral_gap(c)
        for j, eps in enumerate((0.05, 0.1)):
            if cont[k][j] < gap_mixing_lower(gap, eps) * (1 - SLACK):
                bad += 1
    report(8, bad == 0, f"T(eps) >= -log(2 eps)/gap: {bad} violations over {len(chains)} chains")


def test_scan_verdicts():
    families = {
        "simple walk": (FamilySpec("simple_walk", 0), {"cutoff": "bounded", "product": "bounded"}),
        "Ehrenfest": (FamilySpec("ehrenfest", 0), {"product": "growing"}),
        "single bottleneck": (FamilySpec("bottleneck", 0, {"positions": [0.5], "eps": 0.01}),
                              {"cutoff": "bounded", "product": "bounded"}),
    }
    parts, ok = [], True
    for name, (spec, want) in families.items():
        scan = family_scan(spec, SCAN_SIZES, (0.1,))
        got = {"cutoff": cutoff_criterion(scan).verdict, "product": product_criterion(scan).verdict}
        for key, expected in want.items():
            label = "t/ell" if key == "cutoff" else "s*gap"
            parts.append(f"{name} {label} {got[key]} (want {expected})")
            ok &= got[key] == expected
    report(9, ok, "scan verdicts at n in {16..256}: " + "; ".join(parts))


def test_invariant_suites():
    here = Path(__file__).parent
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(here / "test_core.py"), str(here / "test_families.py")],
                          capture_output=True, text=True, check=False, cwd=here.parent)
    elapsed = time.perf_counter() - start
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    report(10, proc.returncode == 0 and elapsed < 10.0,
           f"core and family invariant suites: {summary}, {elapsed:.2f} s (limit 10 s)")
