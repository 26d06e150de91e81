import math

import numpy as np
import pytest

import bdmix.cutoff as cutoff_mod
from bdmix.cutoff import (FamilyScan, cutoff_criterion, family_scan, mixing_bracket_warning,
                          product_criterion, trend_verdict)
from bdmix.errors import InsufficientDataError, SpecError
from bdmix.families import FamilySpec
from bdmix.spectral import SpectrumReport

SCAN_SIZES = [16, 32, 64, 128, 256]

# families whose two criteria are compared; parameters fixed across n
SCRIPTED = {
    "simple_walk": FamilySpec("simple_walk", 0),
    "ehrenfest": FamilySpec("ehrenfest", 0),
    "single_bottleneck": FamilySpec("bottleneck", 0, {"positions": [0.5], "eps": 0.01}),
    "three_bottlenecks": FamilySpec("bottleneck", 0, {"positions": [0.25, 0.5, 0.75], "eps": 0.01}),
    "check": FamilySpec("metropolis_check", 0, {"a": 2.0}),
    "hat": FamilySpec("metropolis_hat", 0, {"a": 2.0}),
    "mono_case1": FamilySpec("monotone_weight", 0, {"case": 1, "alpha": 0.5, "beta": 1.0}),
    "mono_case2": FamilySpec("monotone_weight", 0, {"case": 2, "alpha": 1.0, "beta": 0.5}),
    "mono_case3": FamilySpec("monotone_weight", 0, {"case": 3, "alpha": 1.0, "beta": 2.0}),
    "mono_case4": FamilySpec("monotone_weight", 0, {"case": 4, "alpha": 2.0, "beta": 1.0}),
    "alternating": FamilySpec("alternating", 0),
}

_CACHE = {}


def scan_of(name, sizes=tuple(SCAN_SIZES), exact_limit=64):
    key = (name, sizes, exact_limit)
    if key not in _CACHE:
        _CACHE[key] = family_scan(SCRIPTED[name], sizes, (0.1, 0.25), (0.5,), exact_limit)
    return _CACHE[key]


class TestTrendVerdict:
    def test_constant(self):
        assert trend_verdict([3.0] * 5) == "bounded"

    def test_log_growth(self):
        assert trend_verdict([math.log(n) for n in (16, 64, 256, 1024)]) == "growing"

    def test_flat_then_growing(self):
        assert trend_verdict([1.0, 0.7, 1.0, 2.5]) == "inconclusive"

    def test_small_dip_allowed(self):
        assert trend_verdict([1.0, 1.5, 1.4, 2.1]) == "growing"

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            trend_verdict([1.0, 2.0, 3.0])

    def test_nonpositive(self):
        assert trend_verdict([1.0, 0.0, 2.0, 3.0]) == "inconclusive"


class TestScan:
    def test_simple_walk_bounded(self):
        s = family_scan(SCRIPTED["simple_walk"], [8, 16, 32, 64], (0.1,))
        assert cutoff_criterion(s).verdict == "bounded"
        assert product_criterion(s).verdict == "bounded"

    def test_ehrenfest_product_is_harmonic(self):
        # s * gap = (n/2) H_n * (2/n) = H_n, which grows like log n
        s = family_scan(SCRIPTED["ehrenfest"], [8, 16, 32, 64], (0.1,))
        harmonic = [math.fsum(1 / k for k in range(1, n + 1)) for n in (8, 16, 32, 64)]
        np.testing.assert_allclose(s.column("product_s_gap"), harmonic, rtol=1e-10)
        assert np.all(np.diff(s.column("product_s_gap")) > 0)

    def test_single_bottleneck_bounded(self):
        assert cutoff_criterion(scan_of("single_bottleneck")).verdict == "bounded"

    @pytest.mark.parametrize("name", sorted(SCRIPTED))
    def test_brackets_hold(self, name):
        assert scan_of(name).violations == []

    @pytest.mark.parametrize("name", sorted(SCRIPTED))
    def test_criteria_agree(self, name):
        s = scan_of(name)
        assert cutoff_criterion(s).verdict == product_criterion(s).verdict

    def test_exact_limit(self):
        s = scan_of("simple_walk", exact_limit=64)
        assert s.rows[2]["Tc(0.1)"] is not None and s.rows[3]["Tc(0.1)"] is None
        assert s.rows[3]["Tlazy0.5(0.25)"] is None
        assert product_criterion(s).T_gap is None

    def test_row_contents(self):
        s = family_scan(SCRIPTED["simple_walk"], [2, 3, 4, 5], (0.1,))
        r = s.rows[0]
        assert r["n"] == 2 and r["t"] == pytest.approx(2.0) and r["ell"] == pytest.approx(2.0)
        assert r["gap"] == pytest.approx(0.5) and r["s"] == pytest.approx(8 / 3)
        assert r["ratio_t_over_ell"] == pytest.approx(1.0)
        assert r["product_T_gap"] == pytest.approx(r["Tc(0.1)"] * r["gap"])

    def test_columns_fixed(self):
        s = family_scan(SCRIPTED["simple_walk"], [2, 3], (0.1, 0.25), (0.5, 0.75))
        assert s.columns == ["n", "t", "ell", "gap", "s", "ratio_t_over_ell", "product_s_gap",
                             "product_T_gap", "Tc(0.1)", "Tc(0.25)", "Tlazy0.5(0.1)",
                             "Tlazy0.5(0.25)", "Tlazy0.75(0.1)", "Tlazy0.75(0.25)", "violations"]
        assert s.to_csv().splitlines()[0] == ",".join(s.columns)

    @pytest.mark.parametrize("name", ["simple_walk", "ehrenfest", "mono_case3"])
    def test_round_trip(self, name):
        s = scan_of(name)
        assert FamilyScan.from_csv(s.to_csv(), s.kind) == s
        assert FamilyScan.from_json(s.to_json()) == s

    def test_deterministic(self):
        a = family_scan(SCRIPTED["ehrenfest"], [4, 8], (0.1,), (0.5,))
        b = family_scan(SCRIPTED["ehrenfest"], [4, 8], (0.1,), (0.5,))
        assert a.to_csv() == b.to_csv()

    def test_indices_ascending(self):
        with pytest.raises(SpecError):
            family_scan(SCRIPTED["simple_walk"], [8, 4])

    def test_single_row(self):
        s = family_scan(SCRIPTED["simple_walk"], [8])
        with pytest.raises(InsufficientDataError):
            product_criterion(s)
        with pytest.raises(InsufficientDataError):
            cutoff_criterion(s)

    def test_violation_recorded(self, monkeypatch):
        monkeypatch.setattr(cutoff_mod, "eigenvalues", lambda c: SpectrumReport.from_eigs([10.0] * c.n))
        s = family_scan(SCRIPTED["simple_walk"], [4], (0.1,), exact_limit=0)
        assert len(s.violations) == 1 and "gap" in s.violations[0][1]
        back = FamilyScan.from_csv(s.to_csv())
        assert back.rows[0]["violations"] == s.rows[0]["violations"]


class TestMixingBracket:
    def test_growing_family(self):
        s = scan_of("mono_case1", exact_limit=256)
        assert cutoff_criterion(s).verdict == "growing"
        r = s.rows[-1]
        ratio = r["Tc(0.1)"] / r["t"]
        msg = mixing_bracket_warning(s)
        assert (msg is None) == (2 * math.log(2) / 5 - 0.15 <= ratio <= 2.15)

    def test_warns_outside(self):
        s = scan_of("simple_walk", exact_limit=256)
        with pytest.warns(RuntimeWarning):
            assert mixing_bracket_warning(s, lo=10.0, hi=11.0) is not None

    def test_no_exact_column(self):
        assert mixing_bracket_warning(scan_of("simple_walk", exact_limit=0)) is None
