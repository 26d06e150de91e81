import json

import numpy as np
import pytest
from hypothesis import given, settings

from bdmix.core import (BDChain, StationaryDist, from_rates, lazy, median, quantile_state,
                        stationary, two_state, validate)
from bdmix.errors import (BoundaryError, ParseError, RangeError, ReducibleError,
                          RowSumError)
from bdmix.families import metropolis_check, simple_walk

from .conftest import chains
from . import oracles


def dist_from(prob):
    prob = np.asarray(prob, dtype=float)
    return StationaryDist(np.log(prob), prob, np.cumsum(prob), np.cumsum(prob[::-1])[::-1])


class TestValidate:
    def test_flip_chain(self):
        validate(BDChain([1.0, 0.0], [0.0, 1.0], [0.0, 0.0]))

    def test_simple_walk(self):
        c = BDChain([0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5])
        validate(c)
        assert c == simple_walk(2)

    @pytest.mark.parametrize("p, q, r, err", [
        ([0.5, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.5, 0.5], ReducibleError),
        ([0.5, 0.5, 0.1], [0.0, 0.5, 0.5], [0.5, 0.0, 0.4], BoundaryError),
        ([0.5, 0.5, 0.0], [0.1, 0.5, 0.5], [0.4, 0.0, 0.5], BoundaryError),
        ([0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.4, 0.0, 0.5], RowSumError),
        ([1.5, 0.5, 0.0], [0.0, 0.5, 0.5], [-0.5, 0.0, 0.5], RangeError),
    ])
    def test_errors(self, p, q, r, err):
        with pytest.raises(err):
            BDChain(p, q, r)

    def test_unchecked_then_validate(self):
        c = BDChain([0.5, 0.0, 0.0], [0.0, 0.5, 0.5], check=False)
        with pytest.raises(ReducibleError):
            validate(c)

    def test_rowsum_residue_is_repaired(self):
        c = BDChain([0.3, 0.0], [0.0, 0.3], [0.7 + 5e-13, 0.7])
        assert c.r[0] == pytest.approx(0.7, abs=0)

    def test_missing_r(self):
        c = BDChain([0.25, 0.0], [0.0, 0.75])
        np.testing.assert_array_equal(c.r, [0.75, 0.25])

    def test_immutable(self):
        c = simple_walk(3)
        with pytest.raises(ValueError):
            c.p[0] = 0.1


class TestJson:
    def test_round_trip(self):
        c = metropolis_check(4, 1.5)
        assert BDChain.from_json(c.to_json()) == c

    def test_r_optional(self):
        c = BDChain.from_json(json.dumps({"n": 1, "p": [0.5, 0], "q": [0, 0.5]}))
        np.testing.assert_array_equal(c.r, [0.5, 0.5])

    @pytest.mark.parametrize("text", ["{", "[1, 2]", '{"p": [1, 0]}', '{"n": 3, "p": [1, 0], "q": [0, 1]}'])
    def test_parse_errors(self, text):
        with pytest.raises(ParseError):
            BDChain.from_json(text)


class TestStationary:
    @pytest.mark.parametrize("chain, expected", [
        (simple_walk(2), [1 / 3, 1 / 3, 1 / 3]),
        (BDChain([1.0, 0.5, 0.0], [0.0, 0.5, 1.0]), [0.25, 0.5, 0.25]),
        (BDChain([2 / 3, 0.0], [0.0, 1 / 3], [1 / 3, 2 / 3]), [1 / 3, 2 / 3]),
    ])
    def test_examples(self, chain, expected):
        np.testing.assert_allclose(stationary(chain).prob, expected, rtol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(chains(max_n=40, lo=1e-4))
    def test_detailed_balance_and_prefix(self, c):
        d = stationary(c)
        lhs, rhs = d.prob[:-1] * c.p[:-1], d.prob[1:] * c.q[1:]
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10)
        assert abs(d.prob.sum() - 1) <= 1e-12
        assert np.all(d.prob > 0)
        # increments below one ulp of the running total cannot show in double
        step = np.diff(d.prefix)
        assert np.all(step >= 0) and abs(d.prefix[-1] - 1) <= 1e-12
        assert np.all((step > 0) | (d.prob[1:] < 1e-16))

    def test_matches_linear_solve(self):
        rng = np.random.default_rng(3)
        from .conftest import random_chain
        for _ in range(20):
            c = random_chain(rng, int(rng.integers(1, 15)), lo=0.05)
            K = oracles.kernel(c.p, c.q, c.r)
            np.testing.assert_allclose(stationary(c).prob, oracles.stationary_lstsq(K), rtol=1e-9)

    def test_huge_weights_stay_finite(self):
        d = stationary(metropolis_check(50, 200.0))
        assert np.all(np.isfinite(d.prob)) and abs(d.prob.sum() - 1) <= 1e-12
        # the centre weighs 51^-200 relative to the ends: below double range
        assert np.all(np.isfinite(d.logw)) and d.logw[50] - d.logw[0] < -700
        assert d.prob[0] == pytest.approx(d.prob[-1]) and d.prob[0] == pytest.approx(0.5, rel=0.05)

    def test_mass(self):
        d = stationary(simple_walk(2))
        assert d.mass(0, 1) == pytest.approx(2 / 3)
        assert d.mass(2, 1) == 0.0


class TestMedian:
    @pytest.mark.parametrize("prob, expected", [
        ([1 / 3, 1 / 3, 1 / 3], 1),
        ([0.5, 0.5], 0),
        ([0.1, 0.1, 0.7, 0.1], 2),
    ])
    def test_examples(self, prob, expected):
        assert median(dist_from(prob)) == expected

    @pytest.mark.parametrize("prob, c, expected", [
        ([0.2] * 5, 0.3, 1),
        ([0.9, 0.1], 0.5, 0),
    ])
    def test_quantile(self, prob, c, expected):
        assert quantile_state(dist_from(prob), c) == expected

    @settings(max_examples=40, deadline=None)
    @given(chains(max_n=30))
    def test_quantile_properties(self, c):
        d = stationary(c)
        assert quantile_state(d, 0.5) == median(d)
        cs = np.linspace(0.01, 0.99, 25)
        qs = [quantile_state(d, x) for x in cs]
        assert qs == sorted(qs)
        i0 = median(d)
        assert d.prefix[i0] >= 0.5 - 1e-15 and d.suffix[i0] >= 0.5 - 1e-15

    def test_bad_level(self):
        with pytest.raises(ValueError):
            quantile_state(dist_from([0.5, 0.5]), 1.0)


class TestLazy:
    def test_identity(self):
        c = simple_walk(2)
        assert lazy(c, 0.0) is c

    def test_example(self):
        c = lazy(simple_walk(2), 0.5)
        np.testing.assert_allclose(c.p, [0.25, 0.25, 0])
        np.testing.assert_allclose(c.q, [0, 0.25, 0.25])
        np.testing.assert_allclose(c.r, [0.75, 0.5, 0.75])

    @pytest.mark.parametrize("delta", [-0.1, 1.0])
    def test_domain(self, delta):
        with pytest.raises(ValueError):
            lazy(simple_walk(2), delta)

    @settings(max_examples=40, deadline=None)
    @given(chains(max_n=30))
    def test_stationary_preserved(self, c):
        np.testing.assert_allclose(stationary(lazy(c, 0.37)).prob, stationary(c).prob,
                                   atol=1e-12, rtol=0)


def test_helpers():
    assert two_state(0.2, 0.3) == BDChain([0.2, 0], [0, 0.3])
    assert from_rates([0.5, 0.5], [0.5, 0.5]) == simple_walk(2)
