"""Subset-weighted model: permutation minimum, chain, block tree."""

import math
from itertools import permutations

import numpy as np
import pytest

from remlab.analytic_bk import (
    BkSpec,
    bk_chain,
    bk_energy_chain,
    bk_energy_min,
    block_tree_energy,
    pi_grem,
)
from remlab.analytic_grem import GremSpec, grem_energy_gamma
from remlab.analytic_rem import rem_gaussian
from remlab.rates import LOG2


def _random_bk(rng, n=3):
    p = rng.dirichlet(np.ones(n)) * 0.8 + 0.2 / n
    p = tuple(float(v) for v in p / p.sum())
    weights = {}
    subsets = [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)][: 2 ** n - 1]
    for s in subsets:
        if rng.uniform() < 0.75:
            weights[s] = float(rng.uniform(0.05, 1.5))
    if not weights:
        weights[(1,)] = 1.0
    return BkSpec.make(n, p, weights)


class TestPiGrem:
    def test_full_word_only(self):
        spec = BkSpec.make(2, (0.5, 0.5), {"1": 0.0, "2": 0.0, "1,2": 1.0})
        for pi in ((1, 2), (2, 1)):
            g = pi_grem(spec, pi)
            assert g.a == (0.0, 1.0)

    def test_singletons_identity(self):
        spec = BkSpec.make(2, (0.5, 0.5), {"1": 1.0, "2": 1.0})
        g = pi_grem(spec, (1, 2))
        assert g.a == (1.0, 1.0)

    def test_weight_mass_partition(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            spec = _random_bk(rng)
            total = sum(a * a for _, a in spec.weights)
            for pi in permutations((1, 2, 3)):
                g = pi_grem(spec, pi)
                assert sum(w * w for w in g.a) == pytest.approx(total, abs=1e-12)


class TestEnergyMin:
    def test_full_word_is_rem(self):
        spec = BkSpec.make(2, (0.5, 0.5), {"1,2": 1.0})
        for b in np.linspace(0, 3, 31):
            assert bk_energy_min(spec, float(b)) == pytest.approx(
                rem_gaussian(float(b)), abs=1e-12)

    def test_zero_beta(self):
        rng = np.random.default_rng(1)
        spec = _random_bk(rng)
        assert bk_energy_min(spec, 0.0) == pytest.approx(LOG2, abs=1e-15)

    def test_min_below_each_permutation(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            spec = _random_bk(rng)
            for b in (0.5, 1.2, 2.5):
                value = bk_energy_min(spec, b)
                for pi in permutations((1, 2, 3)):
                    assert value <= grem_energy_gamma(pi_grem(spec, pi), b) + 1e-12

    def test_nested_prefixes_reduce_to_grem(self):
        # weights only on {1}, {1,2}, {1,2,3}: the ultrametric special case
        p = (0.3, 0.3, 0.4)
        a = {"1": 1.1, "1,2": 0.8, "1,2,3": 0.5}
        spec = BkSpec.make(3, p, a)
        plain = GremSpec.uniform(p, (1.1, 0.8, 0.5), 2.0)
        for b in np.linspace(0, 3, 31):
            assert bk_energy_min(spec, float(b)) == pytest.approx(
                grem_energy_gamma(plain, float(b)), abs=1e-12)

    def test_zero_weight_entries_are_inert(self):
        rng = np.random.default_rng(3)
        spec = _random_bk(rng)
        padded = dict(spec.weights)
        for s in [(1,), (2, 3), (1, 2, 3)]:
            padded.setdefault(s, 0.0)
        spec2 = BkSpec.make(spec.n, spec.p, padded)
        for b in (0.0, 0.7, 1.9):
            assert bk_energy_min(spec, b) == bk_energy_min(spec2, b)
            assert bk_energy_chain(spec, b) == bk_energy_chain(spec2, b)


class TestChain:
    def test_full_word_chain(self):
        spec = BkSpec.make(2, (0.5, 0.5), {"1,2": 1.0})
        chain = bk_chain(spec)
        assert chain.K == 1
        assert chain.sets == ((1, 2),)
        assert chain.thresholds == pytest.approx((math.sqrt(2 * LOG2),), abs=1e-12)

    def test_prefix_weights_match_grem_ladder(self):
        from remlab.analytic_grem import beta_ladder

        p = (0.3, 0.3, 0.4)
        spec = BkSpec.make(3, p, {"1": 1.3, "1,2": 0.9, "1,2,3": 0.5})
        chain = bk_chain(spec)
        lad = beta_ladder(GremSpec.uniform(p, (1.3, 0.9, 0.5), 2.0))
        assert chain.thresholds == pytest.approx(lad.betas, abs=1e-12)
        assert tuple(len(s) for s in chain.sets) == lad.ranks

    def test_thresholds_strictly_increase(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            chain = bk_chain(_random_bk(rng))
            assert all(b2 > b1 for b1, b2 in
                       zip(chain.thresholds, chain.thresholds[1:]))
            assert chain.sets[-1] == (1, 2, 3)

    def test_chain_equals_min(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            spec = _random_bk(rng)
            for b in np.linspace(0, 3, 25):
                assert bk_energy_chain(spec, float(b)) == pytest.approx(
                    bk_energy_min(spec, float(b)), abs=1e-10)

    def test_minimizing_class_size(self):
        # symmetric singleton weights: every permutation minimizes
        spec = BkSpec.make(3, (1 / 3, 1 / 3, 1 / 3),
                           {"1": 1.0, "2": 1.0, "3": 1.0})
        chain = bk_chain(spec)
        assert chain.minimizing_permutation_count == 6

    def test_chain_equals_min_four_symbols(self):
        from itertools import combinations

        rng = np.random.default_rng(7)
        for _ in range(4):
            p = rng.dirichlet(np.ones(4)) * 0.8 + 0.05
            p = tuple(float(v) for v in p / p.sum())
            weights = {s: float(rng.uniform(0.05, 1.5))
                       for r in range(1, 5)
                       for s in combinations(range(1, 5), r)
                       if rng.uniform() < 0.5}
            if not weights:
                weights[(1,)] = 1.0
            spec = BkSpec.make(4, p, weights)
            for b in np.linspace(0, 3, 13):
                assert bk_energy_chain(spec, float(b)) == pytest.approx(
                    bk_energy_min(spec, float(b)), abs=1e-10)


class TestBlockTree:
    def test_zero_beta(self):
        assert block_tree_energy((0.5, 0.5), (1.0, 0.4), 0.0) == pytest.approx(LOG2)

    def test_symmetric_levels(self):
        p = (0.5, 0.5)
        a = (0.8, 0.8)
        spec = GremSpec.uniform(p, a, 2.0)
        for b in (0.3, 1.0, 2.2):
            assert block_tree_energy(p, a, b) == pytest.approx(
                grem_energy_gamma(spec, b), abs=1e-14)

    def test_dominates_bk_minimum_on_matched_weights(self):
        # block tree with the grouped weights w(pi, i) evaluates the same
        # permutation energies the BK minimum scans, so max >= min
        rng = np.random.default_rng(6)
        for _ in range(5):
            spec = _random_bk(rng)
            for b in (0.4, 1.1, 2.3):
                block = max(
                    grem_energy_gamma(pi_grem(spec, pi), b)
                    for pi in permutations((1, 2, 3)))
                assert block >= bk_energy_min(spec, b) - 1e-12

    def test_convexity_and_anchor(self):
        grid = np.linspace(0, 3, 200)
        vals = np.array([block_tree_energy((0.4, 0.6), (1.0, 0.5), float(b))
                         for b in grid])
        assert vals[0] == pytest.approx(LOG2, abs=1e-14)
        assert np.min(np.diff(vals, 2)) >= -1e-9
        mins = np.array([bk_energy_min(
            BkSpec.make(2, (0.4, 0.6), {"1": 1.0, "2": 0.5}), float(b))
            for b in grid])
        assert np.min(np.diff(mins, 2)) >= -1e-9


class TestValidation:
    def test_caps_and_keys(self):
        with pytest.raises(ValueError):
            BkSpec.make(9, tuple([1 / 9] * 9), {"1": 1.0})
        with pytest.raises(ValueError):
            BkSpec.make(2, (0.5, 0.5), {"1,1": 1.0})
        with pytest.raises(ValueError):
            BkSpec.make(2, (0.5, 0.5), {"3": 1.0})
        with pytest.raises(ValueError):
            BkSpec.make(2, (0.5, 0.5), {"1": 0.0})

    def test_json_round_trip(self):
        spec = BkSpec.make(3, (0.2, 0.3, 0.5), {"1": 0.2, "1,3": 0.5, "1,2,3": 0.3})
        back = BkSpec.from_dict(spec.to_dict())
        assert back == spec
