import math

import numpy as np
import pytest

from fairscore import (
    Dataset,
    FairnessConstraint,
    RegionOfInterest,
    RngStream,
    audit_reference,
    check_fairness,
    confidence_error,
    estimate_up,
    rank,
    stable_rankings,
    suggest_fair,
)
from fairscore.errors import InvalidConfidence, ReferenceOutsideRegion
from fairscore.estimators import RankingScope

from .conftest import make_synthetic
from .oracles import exact_stability, exact_up, ranking_fractions


class TestConfidenceError:
    def test_reference_value(self):
        # Z(0.975) = 1.95996...; times sqrt(0.25/100) = 0.05
        assert confidence_error(0.5, 100, 0.05) == pytest.approx(0.0980, abs=1e-4)

    def test_degenerate_means(self):
        assert confidence_error(0.0, 50, 0.05) == 0.0
        assert confidence_error(1.0, 50, 0.05) == 0.0

    def test_inverse_sqrt_scaling(self):
        assert confidence_error(0.3, 400, 0.1) == pytest.approx(
            confidence_error(0.3, 1600, 0.1) * 2
        )

    def test_invalid_alpha(self):
        for alpha in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(InvalidConfidence):
                confidence_error(0.5, 100, alpha)


class TestEstimateUp:
    def test_unsatisfiable_constraint(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        absent = [FairnessConstraint(group="Boston", k=3, min_count=1)]
        est = estimate_up(example1, absent, roi, 100, 0.05, RngStream(0))
        assert est.up == 1.0 and est.error == 0.0

    def test_empty_constraints(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        est = estimate_up(example1, [], roi, 100, 0.05, RngStream(0))
        assert est.up == 0.0 and est.error == 0.0

    def test_matches_exact_arc_oracle(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        exact = exact_up(example1, detroit_top3, roi)
        est = estimate_up(example1, detroit_top3, roi, 10_000, 0.05, RngStream(0))
        assert abs(est.up - exact) <= est.error
        assert est.error == confidence_error(est.up, est.samples, est.alpha)

    def test_convergence_between_budgets(self, example1, detroit_top3):
        # |up(s) - up(4s)| <= e(s) + e(4s) should hold for most seeds
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        holds = 0
        for seed in range(20):
            small = estimate_up(example1, detroit_top3, roi, 2000, 0.05, RngStream(seed))
            big = estimate_up(
                example1, detroit_top3, roi, 8000, 0.05, RngStream(1000 + seed)
            )
            holds += abs(small.up - big.up) <= small.error + big.error
        assert holds >= 16

    def test_thread_count_does_not_change_result(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        serial = estimate_up(example1, detroit_top3, roi, 5000, 0.05, RngStream(3))
        threaded = estimate_up(
            example1, detroit_top3, roi, 5000, 0.05, RngStream(3), threads=4
        )
        assert serial == threaded

    def test_three_dimensional_region(self):
        data = make_synthetic(40, 3, seed=0)
        roi = RegionOfInterest.around([1.0, 0.8, 0.5], math.pi / 20)
        constraint = [FairnessConstraint(group="A", k=5, min_count=1)]
        est = estimate_up(data, constraint, roi, 2000, 0.05, RngStream(1))
        assert 0.0 <= est.up <= 1.0

    def test_small_budget_rejected(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        with pytest.raises(ValueError):
            estimate_up(example1, detroit_top3, roi, 29, 0.05, RngStream(0))

    def test_progress_callback(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        seen = []
        estimate_up(
            example1, detroit_top3, roi, 2000, 0.05, RngStream(0),
            progress=lambda done, total: seen.append((done, total)),
        )
        assert seen[-1] == (2000, 2000)
        assert [d for d, _ in seen] == sorted(d for d, _ in seen)


class TestSuggestFair:
    def test_finds_fair_function_nearby(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 16)
        suggestion = suggest_fair(example1, detroit_top3, roi, 1000, RngStream(0))
        assert suggestion.found
        assert suggestion.samples_used == 1000
        assert np.linalg.norm(suggestion.function) == pytest.approx(1.0, abs=1e-12)
        assert suggestion.angular_gap <= roi.theta + 1e-9
        assert check_fairness(
            rank(example1, suggestion.function), example1, detroit_top3
        )
        # the fair sub-arc starts 0.037 rad from the reference, so the
        # closest accepted sample cannot be nearer than that boundary
        assert suggestion.angular_gap >= 0.037

    def test_already_fair_reference(self, example1):
        chicago = [FairnessConstraint(group="Chicago", k=3, min_count=1)]
        roi = RegionOfInterest.around([1, 1], math.pi / 16)
        suggestion = suggest_fair(example1, chicago, roi, 1000, RngStream(1), mode="first")
        assert suggestion.found and suggestion.samples_used == 1
        assert suggestion.angular_gap <= roi.theta

    def test_unsatisfiable_returns_not_found(self, example1):
        absent = [FairnessConstraint(group="Boston", k=3, min_count=1)]
        roi = RegionOfInterest.around([1, 1], math.pi / 16)
        suggestion = suggest_fair(example1, absent, roi, 500, RngStream(2))
        assert not suggestion.found
        assert suggestion.function is None
        assert suggestion.samples_used == 500

    def test_closest_not_worse_than_first(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 16)
        closest = suggest_fair(example1, detroit_top3, roi, 1000, RngStream(3))
        first = suggest_fair(
            example1, detroit_top3, roi, 1000, RngStream(3), mode="first"
        )
        assert closest.angular_gap <= first.angular_gap + 1e-12

    def test_deterministic(self, example1, detroit_top3):
        roi = RegionOfInterest.around([1, 1], math.pi / 16)
        a = suggest_fair(example1, detroit_top3, roi, 400, RngStream(4))
        b = suggest_fair(example1, detroit_top3, roi, 400, RngStream(4))
        assert a.found == b.found and a.angular_gap == b.angular_gap
        assert np.array_equal(a.function, b.function)


class TestAuditReference:
    def test_single_region_full_stability(self):
        data = Dataset.from_matrix([[0.6, 0.4], [0.4, 0.6]])
        roi = RegionOfInterest.around([0.9, 1.2], 0.05)
        result = audit_reference(data, np.array([0.9, 1.2]), roi, 2000, 0.05, RngStream(0))
        assert result.stability == 1.0 and result.error == 0.0

    def test_cap_centered_on_exchange_plane(self):
        # the exchange between the two records is the diagonal; a cap
        # centered there splits evenly between the two orders
        data = Dataset.from_matrix([[0.6, 0.4], [0.4, 0.6]])
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 16)
        result = audit_reference(data, np.array([1.0, 1.0]), roi, 5000, 0.05, RngStream(1))
        assert abs(result.stability - 0.5) <= max(result.error, 3 * 0.00707)

    def test_matches_arc_oracle(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 100)
        ref = np.array([1.0, 1.0])
        exact = exact_stability(example1, roi, ref, RankingScope.full())
        result = audit_reference(example1, ref, roi, 10_000, 0.05, RngStream(2))
        assert abs(result.stability - exact) <= result.error + 1e-12

    def test_reference_outside_region(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 100)
        with pytest.raises(ReferenceOutsideRegion):
            audit_reference(example1, np.array([1.0, 0.2]), roi, 100, 0.05, RngStream(0))

    def test_top_k_scope(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        ref = np.array([1.0, 1.0])
        scope = RankingScope.top_k(3)
        exact = exact_stability(example1, roi, ref, scope)
        result = audit_reference(
            example1, ref, roi, 10_000, 0.05, RngStream(2), scope=scope
        )
        assert abs(result.stability - exact) <= result.error


class TestStableRankings:
    def test_single_region_single_entry(self):
        data = Dataset.from_matrix([[0.6, 0.4], [0.4, 0.6]])
        roi = RegionOfInterest.around([0.9, 1.2], 0.05)
        report = stable_rankings(
            data, roi, 1000, 5, RankingScope.full(), RngStream(0)
        )
        assert len(report.histogram) == 1
        assert report.top_rankings[0].count == 1000
        assert report.top_rankings[0].ids == ("t2", "t1")

    def test_counts_sum_to_samples(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        report = stable_rankings(
            example1, roi, 4000, 3, RankingScope.full(), RngStream(1)
        )
        assert sum(report.histogram.values()) == 4000

    def test_matches_arc_fractions(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        scope = RankingScope.full()
        s = 10_000
        report = stable_rankings(example1, roi, s, 20, scope, RngStream(2))
        fractions = ranking_fractions(example1, roi, scope)
        observed = {e.ids: e.stability for e in report.top_rankings}
        assert set(observed) == set(fractions)
        z = 1.959963984540054
        for ids, frac in fractions.items():
            e = z * math.sqrt(frac * (1 - frac) / s)
            assert abs(observed[ids] - frac) <= 3 * e

    def test_top_k_set_scope_matches_oracle(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        scope = RankingScope.top_k(3)
        report = stable_rankings(example1, roi, 8000, 10, scope, RngStream(3))
        fractions = ranking_fractions(example1, roi, scope)
        observed = {e.ids: e.stability for e in report.top_rankings}
        assert set(observed) == set(fractions)

    def test_top_k_sequence_scope_distinguishes_order(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        set_report = stable_rankings(
            example1, roi, 5000, 20, RankingScope.top_k(3), RngStream(4)
        )
        seq_report = stable_rankings(
            example1, roi, 5000, 20, RankingScope.top_k(3, ordered=True), RngStream(4)
        )
        assert len(seq_report.histogram) >= len(set_report.histogram)

    def test_reference_stability_matches_audit(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        ref = np.array([1.0, 1.0])
        report = stable_rankings(
            example1, roi, 5000, 5, RankingScope.full(), RngStream(5), reference=ref
        )
        audit = audit_reference(example1, ref, roi, 5000, 0.05, RngStream(5))
        assert report.reference_stability[0] == pytest.approx(audit.stability)

    def test_histogram_invariant_to_record_order(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        shuffled = Dataset.from_matrix(
            example1.matrix[::-1].copy(),
            ids=list(example1.ids[::-1]),
            groups=list(example1.groups[::-1]),
            attribute_names=example1.attribute_names,
            sensitive_attribute="location",
        )
        a = stable_rankings(example1, roi, 3000, 5, RankingScope.full(), RngStream(6))
        b = stable_rankings(shuffled, roi, 3000, 5, RankingScope.full(), RngStream(6))
        assert a.histogram == b.histogram

    def test_deterministic_per_seed(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        a = stable_rankings(example1, roi, 2000, 5, RankingScope.full(), RngStream(7))
        b = stable_rankings(example1, roi, 2000, 5, RankingScope.full(), RngStream(7))
        assert a.histogram == b.histogram
        assert [e.ids for e in a.top_rankings] == [e.ids for e in b.top_rankings]

    def test_threads_do_not_change_histogram(self, example1):
        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        serial = stable_rankings(example1, roi, 4000, 5, RankingScope.full(), RngStream(8))
        threaded = stable_rankings(
            example1, roi, 4000, 5, RankingScope.full(), RngStream(8), threads=3
        )
        assert serial.histogram == threaded.histogram
        assert [e.ids for e in serial.top_rankings] == [
            e.ids for e in threaded.top_rankings
        ]


class TestScalingCost:
    def test_estimate_up_linear_in_samples(self, example1, detroit_top3):
        # per-sample cost should stay within 20% of its geometric mean
        # across two decades of budget; timing noise is one-sided, so up to
        # three sweeps may run and one clean window suffices
        import time

        roi = RegionOfInterest.around([1, 1], math.pi / 8)
        estimate_up(example1, detroit_top3, roi, 1000, 0.05, RngStream(0))  # warm-up
        for attempt in range(3):
            best = {s: math.inf for s in (1000, 10_000, 100_000)}
            for rep in range(4):
                for s in best:
                    t0 = time.perf_counter()
                    estimate_up(example1, detroit_top3, roi, s, 0.05, RngStream(rep))
                    best[s] = min(best[s], time.perf_counter() - t0)
            per_sample = [t / s for s, t in best.items()]
            mean = math.exp(np.mean(np.log(per_sample)))
            if max(per_sample) <= 1.2 * mean and min(per_sample) >= 0.8 * mean:
                return
        assert False, f"per-sample cost not linear within 20%: {per_sample}"
