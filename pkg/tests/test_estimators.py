"""Series, fixed-point, and Monte-Carlo estimators against slow oracles."""

import math

import numpy as np
import pytest

from shotgun_assembly.errors import InvalidGamma
from shotgun_assembly.estimators import (
    assembly_threshold,
    component_class_frequencies,
    decay_diagnostics,
    decay_table_to_csv,
    decay_table_to_json,
    extinction_probability,
    iso_decay_rate,
    iso_mc,
    iso_series,
    small_iso_mc,
    spine_event_mc,
    spine_event_profile,
    surviving_iso_mc,
    surviving_iso_profile,
    tree_catalog,
    tree_class_probability,
    truncated_iso_mc,
)
from shotgun_assembly.rooted import RootedTree, canon_tree

from helpers import (
    ROOTED_TREE_COUNTS,
    bisection_fixed_point,
    slow_gw_tree,
    slow_tree_iso,
)


class TestExtinctionProbability:
    def test_subcritical_is_one(self):
        for lam in (0.2, 0.7, 1.0):
            assert extinction_probability(lam) == 1.0

    @pytest.mark.parametrize("lam", [1.1, 1.5, 2.0, 3.0, 5.0])
    def test_matches_bisection_oracle(self, lam):
        q = extinction_probability(lam)
        assert abs(q - bisection_fixed_point(lam)) < 1e-10

    @pytest.mark.parametrize("lam", [1.1, 1.5, 2.0, 3.0, 5.0])
    def test_fixed_point_residual(self, lam):
        q = extinction_probability(lam)
        assert abs(q - math.exp(-lam + lam * q)) < 1e-10

    def test_validation(self):
        with pytest.raises(ValueError):
            extinction_probability(0.0)
        with pytest.raises(ValueError):
            extinction_probability(float("nan"))


class TestTreeClassProbability:
    def test_hand_values(self):
        lam = 1.3
        single = RootedTree([-1])
        assert math.isclose(tree_class_probability(lam, single), math.exp(-lam))
        edge = RootedTree([-1, 0])
        # root has one child, the child is a leaf
        want = lam * math.exp(-lam) * math.exp(-lam)
        assert math.isclose(tree_class_probability(lam, edge), want)
        cherry = RootedTree([-1, 0, 0])
        want = (lam**2 / 2) * math.exp(-lam) * math.exp(-2 * lam)
        assert math.isclose(tree_class_probability(lam, cherry), want)

    def test_symmetry_correction(self):
        lam = 0.9
        # root with two distinct subtrees: leaf and path; no symmetry factor
        t = RootedTree([-1, 0, 0, 2])
        p_leaf = math.exp(-lam)
        p_path = lam * math.exp(-2 * lam)
        want = (lam**2) * math.exp(-lam) * p_leaf * p_path
        assert math.isclose(tree_class_probability(lam, t), want)

    @pytest.mark.parametrize("lam,limit", [(0.5, 1.0), (2.0, None)])
    def test_total_mass_approaches_extinction_probability(self, lam, limit):
        # the probability that the tree is finite is the extinction
        # probability; summing every class up to size 12 should get close
        total = sum(
            tree_class_probability(lam, t) for _, t in tree_catalog(12)
        )
        target = limit if limit is not None else extinction_probability(lam)
        assert total < target + 1e-12
        assert total > target - 0.01


class TestTreeCatalog:
    def test_counts_match_reference_sequence(self):
        from collections import Counter

        cat = tree_catalog(8)
        by_size = Counter(t.n for _, t in cat)
        for n in range(1, 9):
            assert by_size[n] == ROOTED_TREE_COUNTS[n - 1]

    def test_codes_distinct_and_consistent(self):
        cat = tree_catalog(7)
        codes = [code for code, _ in cat]
        assert len(set(codes)) == len(codes)
        for code, t in cat:
            assert canon_tree(t) == code

    def test_validation(self):
        with pytest.raises(ValueError):
            tree_catalog(0)


class TestIsoSeries:
    def test_first_term(self):
        for lam in (0.5, 1.0, 2.0):
            s = iso_series(lam, 5)
            assert math.isclose(s.terms_by_size[0], math.exp(-2 * lam))

    def test_monotone_in_size(self):
        sums = [iso_series(1.0, k).partial_sum for k in range(1, 13)]
        assert all(b >= a for a, b in zip(sums, sums[1:]))
        assert 0 < sums[-1] < 1

    def test_tail_allowance(self):
        s = iso_series(1.0, 12)
        assert s.tail_allowance() == 10 * s.terms_by_size[-1]

    def test_equals_direct_class_sum(self):
        lam = 1.4
        s = iso_series(lam, 8)
        direct = sum(
            tree_class_probability(lam, t) ** 2 for _, t in tree_catalog(8)
        )
        assert math.isclose(s.partial_sum, direct, rel_tol=1e-12)


class TestDecayRateAndThreshold:
    def test_rate_formula(self):
        assert math.isclose(iso_decay_rate(1.0, 0.3), 0.3)
        assert math.isclose(iso_decay_rate(0.5, 0.8), 0.2)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidGamma):
            iso_decay_rate(1.0, 0.0)
        with pytest.raises(InvalidGamma):
            iso_decay_rate(1.0, 1.0)
        with pytest.raises(InvalidGamma):
            iso_decay_rate(3.0, 0.2)

    def test_threshold_scales_with_log_n(self):
        r1 = assembly_threshold(10**3, 1.0, 0.3)
        r2 = assembly_threshold(10**6, 1.0, 0.3)
        assert math.isclose(r2, 2 * r1, rel_tol=1e-12)
        with pytest.raises(ValueError):
            assembly_threshold(1, 1.0, 0.3)


class TestIsoMC:
    def test_deterministic(self):
        a = iso_mc(1.0, 2000, seed=5)
        b = iso_mc(1.0, 2000, seed=5)
        assert a == b

    def test_matches_slow_reference(self):
        lam, n_pairs = 1.0, 3000
        rng = np.random.default_rng(99)
        hits = 0
        for _ in range(n_pairs):
            a = slow_gw_tree(rng, lam)
            b = slow_gw_tree(rng, lam)
            if a is not None and b is not None and slow_tree_iso(a, b):
                hits += 1
        slow = hits / n_pairs
        fast = iso_mc(lam, 20_000, seed=6)
        se = math.hypot(
            math.sqrt(slow * (1 - slow) / n_pairs), fast.std_error
        )
        assert abs(fast.mean - slow) < 4 * se

    def test_agrees_with_series(self):
        lam = 0.8
        series = iso_series(lam, 12)
        mc = iso_mc(lam, 50_000, seed=8)
        allowance = series.tail_allowance()
        assert (
            series.partial_sum - 3 * mc.std_error
            <= mc.mean
            <= series.partial_sum + allowance + 3 * mc.std_error
        )

    def test_small_iso_bounds_full_iso(self):
        lam, samples = 1.0, 30_000
        small = small_iso_mc(lam, 4, samples, seed=3)
        full = iso_mc(lam, samples, seed=3)
        # isomorphism of small pairs implies isomorphism, so the small-tree
        # rate sits below the full rate up to sampling noise
        assert small.mean <= full.mean + 3 * math.hypot(small.std_error, full.std_error)

    def test_validation(self):
        with pytest.raises(ValueError):
            iso_mc(1.0, 0, seed=0)


class TestTruncatedAndSurviving:
    def test_r0_exact(self):
        t = truncated_iso_mc(1.0, 0, 100, seed=0)
        assert t.mean == 1.0 and t.std_error == 0.0

    def test_surviving_below_truncated(self):
        lam, r, samples = 1.0, 4, 30_000
        surv = surviving_iso_mc(lam, r, samples, seed=2)
        trunc = truncated_iso_mc(lam, r, samples, seed=2)
        assert surv.mean <= trunc.mean

    def test_profile_matches_single_radius(self):
        lam, samples = 1.0, 10_000
        prof = surviving_iso_profile(lam, 5, samples, seed=4)
        assert prof["surviving"][3] == surviving_iso_mc(lam, 3, samples, seed=4)
        assert prof["truncated"][5] == truncated_iso_mc(lam, 5, samples, seed=4)

    def test_surviving_nonincreasing(self):
        prof = surviving_iso_profile(1.0, 6, 50_000, seed=10)
        means = [e.mean for e in prof["surviving"]]
        assert all(b <= a + 1e-12 for a, b in zip(means, means[1:]))


class TestSpineEvent:
    def test_validation(self):
        with pytest.raises(ValueError):
            spine_event_mc(1.0, 2, 2, 100, seed=0)
        with pytest.raises(ValueError):
            spine_event_profile(1.0, [], 1, 100, seed=0)

    def test_profile_matches_single(self):
        single = spine_event_mc(1.0, 4, 1, 20_000, seed=9)
        prof = spine_event_profile(1.0, [4, 5], 1, 20_000, seed=9)
        assert prof[4] == single

    def test_rare_but_present(self):
        est = spine_event_mc(1.0, 4, 1, 50_000, seed=12)
        assert 0 <= est.mean < 0.05


class TestDecayDiagnostics:
    def test_table_shape_and_serialization(self):
        table = decay_diagnostics(1.0, 4, 20_000, seed=1)
        assert len(table.rows) == 4
        assert table.rows[0].r == 1
        as_json = decay_table_to_json(table)
        assert len(as_json["rows"]) == 4
        csv_text = decay_table_to_csv(table)
        lines = csv_text.strip().split("\n")
        assert lines[0].startswith("r,p_hat")
        assert len(lines) == 5

    def test_sandwich_holds_on_decent_sample(self):
        table = decay_diagnostics(1.0, 5, 200_000, seed=2)
        assert not any(row.flag for row in table.rows)

    def test_validation(self):
        with pytest.raises(ValueError):
            decay_diagnostics(1.0, 0, 100, seed=0)


class TestComponentFrequencies:
    def test_counts_and_determinism(self):
        a = component_class_frequencies(500, 1.0, 400, seed=3, max_size=6)
        b = component_class_frequencies(500, 1.0, 400, seed=3, max_size=6)
        assert a.counts == b.counts and a.oversize == b.oversize
        assert sum(a.counts.values()) + a.oversize == 400

    def test_isolated_vertex_rate(self):
        # P(isolated) = (1 - lam/n)^(n-1) ~ e^-lam
        n, lam, samples = 2000, 1.0, 4000
        freq = component_class_frequencies(n, lam, samples, seed=7, max_size=4)
        singleton_code = max(freq.counts, key=freq.counts.get)
        want = (1 - lam / n) ** (n - 1)
        got = freq.counts[singleton_code] / samples
        se = math.sqrt(want * (1 - want) / samples)
        assert abs(got - want) < 4 * se

    def test_validation(self):
        with pytest.raises(ValueError):
            component_class_frequencies(1, 1.0, 10, seed=0)
        with pytest.raises(ValueError):
            component_class_frequencies(10, 20.0, 10, seed=0)
