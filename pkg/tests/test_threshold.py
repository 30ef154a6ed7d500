from __future__ import annotations

import random
import warnings
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doppel.embedding import hash_embed
from doppel.errors import (
    DegenerateDistributionWarning,
    DistributionEmptyError,
    IntegrityError,
    ValidationError,
)
from doppel.preprocess import prepare_corpus
from doppel.similarity import SimilarityRecord, pairwise
from doppel.threshold import build_s, local_threshold, percentile, select_candidates, top_k

from conftest import PLANTED_DIM, make_discussion, planted_corpus
from oracles import naive_percentile_fraction, naive_r_set, naive_top_k_pairs


def _records_from(values: dict[tuple[int, int], float]) -> list[SimilarityRecord]:
    return [SimilarityRecord(m, t, v) for (m, t), v in sorted(values.items())]


def _random_records(rng: random.Random, n: int) -> list[SimilarityRecord]:
    values = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            values[(i, j)] = rng.random()
    return _records_from(values)


class TestTopK:
    def test_hand_enumerated_triangle(self):
        records = _records_from({(1, 2): 0.9, (1, 3): 0.5, (2, 3): 0.8})
        # 1 picks 2; 2 picks 1; 3 picks 2 -> unique pairs {12, 23}
        assert top_k(records, 1) == {(1, 2), (2, 3)}

    def test_degree_below_k(self):
        records = _records_from({(1, 2): 0.4})
        assert top_k(records, 5) == {(1, 2)}

    def test_k_saturates_to_all_pairs(self):
        rng = random.Random(0)
        records = _random_records(rng, 9)
        assert len(top_k(records, 8)) == 36

    def test_matches_per_node_sort_oracle(self):
        rng = random.Random(42)
        records = _random_records(rng, 25)
        for k in (1, 3, 5, 9):
            ours = {frozenset(p) for p in top_k(records, k)}
            assert ours == naive_top_k_pairs(records, k)

    def test_tie_at_kth_rank_cuts_by_id(self):
        # Node 1 ties between partners 2 and 3 at k=1 and must keep the
        # smaller id; nodes 2 and 3 prefer 4, so (1, 3) has no other way in.
        records = _records_from({(1, 2): 0.7, (1, 3): 0.7, (2, 4): 0.8, (3, 4): 0.9})
        support = top_k(records, 1)
        assert (1, 2) in support
        assert (1, 3) not in support

    def test_k_must_be_positive(self):
        with pytest.raises(ValidationError):
            top_k([], 0)


class TestBuildS:
    def test_two_docs_single_element(self):
        records = _records_from({(1, 2): 0.3})
        assert build_s(records, 5) == [0.3]

    def test_sorted_ascending(self):
        rng = random.Random(3)
        s = build_s(_random_records(rng, 12), 4)
        assert s == sorted(s)

    def test_deduplication_makes_s_smaller_than_n_times_k(self):
        # mutual picks collapse: Size(S) < n*k on any clustered corpus
        rng = random.Random(1)
        n, k = 30, 5
        records = _random_records(rng, n)
        s = build_s(records, k)
        assert len(s) < n * k
        assert len(s) == len(naive_top_k_pairs(records, k))

    def test_k_at_least_n_minus_1_covers_all_pairs(self):
        rng = random.Random(9)
        n = 13
        records = _random_records(rng, n)
        assert len(build_s(records, n - 1)) == n * (n - 1) // 2

    def test_empty_records_error(self):
        with pytest.raises(DistributionEmptyError):
            build_s([], 5)


class TestPercentile:
    def test_singleton_any_q(self):
        for q in (0, 13, 50, 99, 100):
            assert percentile([5], q) == 5

    def test_quarter_interpolation(self):
        assert percentile([1, 2, 3, 4], 25) == 1.75

    def test_odd_length_median(self):
        assert percentile([1, 2, 3, 4, 5], 50) == 3

    def test_endpoints_exact(self):
        xs = [1.5, 2.5, 9.0]
        assert percentile(xs, 0) == 1.5
        assert percentile(xs, 100) == 9.0

    def test_empty_error(self):
        with pytest.raises(DistributionEmptyError):
            percentile([], 50)

    def test_q_range_validated(self):
        with pytest.raises(ValidationError):
            percentile([1.0], 101)

    def test_agrees_with_rational_oracle_on_random_integers(self):
        rng = random.Random(7)
        for _ in range(200):
            xs = sorted(rng.randrange(-50, 50) for _ in range(rng.randint(1, 12)))
            q = rng.choice([0, 25, 50, 75, 100])
            assert percentile(xs, q) == naive_percentile_fraction(xs, q)


class TestLocalThreshold:
    def test_fence_formula_on_engineered_quartiles(self):
        # 5-point distribution hits the stated quartiles exactly
        s = sorted([0.516, 0.566, 0.648, 0.711, 0.731])
        stats = local_threshold(s, k=5)
        assert stats.q1 == pytest.approx(0.566, abs=1e-12)
        assert stats.q3 == pytest.approx(0.711, abs=1e-12)
        assert stats.iqr == pytest.approx(0.145, abs=1e-12)
        assert stats.t_related == pytest.approx(0.9285, abs=1e-12)
        assert abs(stats.t_related - 0.9278) < 0.01  # reference value, 3-decimal rounding

    def test_fence_formula_second_reference_row(self):
        s = sorted([0.495, 0.535, 0.602, 0.665, 0.685])
        stats = local_threshold(s, k=5)
        assert stats.iqr == pytest.approx(0.130, abs=1e-12)
        assert stats.t_related == pytest.approx(0.860, abs=1e-12)
        assert abs(stats.t_related - 0.8592) < 0.01

    def test_constant_distribution_degenerates(self):
        with pytest.warns(DegenerateDistributionWarning):
            stats = local_threshold([0.5] * 10, k=5)
        assert stats.q1 == stats.q2 == stats.q3 == 0.5
        assert stats.iqr == 0.0
        assert stats.t_related == 0.5

    def test_size_s_recorded(self):
        stats = local_threshold([0.1, 0.2, 0.9], k=2)
        assert stats.size_s == 3 and stats.k == 2

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=60)
    )
    def test_fence_identity_over_random_distributions(self, values):
        s = sorted(values)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            stats = local_threshold(s, k=3)
        assert stats.iqr == stats.q3 - stats.q1
        assert stats.t_related == stats.q3 + 1.5 * stats.iqr
        assert stats.q1 <= stats.q2 <= stats.q3


class TestSelectCandidates:
    def _corpus(self, n):
        return [make_discussion(i) for i in range(1, n + 1)]

    def test_all_below_threshold_gives_empty_r(self):
        records = _records_from({(1, 2): 0.1, (1, 3): 0.2, (2, 3): 0.15})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            stats = local_threshold([0.8, 0.9], k=1)
        assert select_candidates(records, stats, self._corpus(3)) == []

    def test_planted_pairs_recovered_exactly(self):
        discussions, planted = planted_corpus()
        docs, _ = prepare_corpus(discussions)
        vectors = [hash_embed(d.text, PLANTED_DIM) for d in docs]
        records = pairwise(docs, vectors)
        stats = local_threshold(build_s(records, 5), 5)
        candidates = select_candidates(records, stats, discussions)
        assert {(c.master_id, c.target_id) for c in candidates} == planted
        assert len(candidates) == 4
        # construction cross-check with the naive end-to-end oracle
        t, r = naive_r_set(records, 5)
        assert r == planted

    def test_enrichment_carries_titles_and_urls(self):
        corpus = self._corpus(2)
        records = _records_from({(1, 2): 0.95})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            stats = local_threshold([0.9], k=1)
        (c,) = select_candidates(records, stats, corpus)
        assert c.master_title == corpus[0].title
        assert c.target_url == corpus[1].url

    def test_degenerate_iqr_selects_everything_at_q3(self):
        values = {(1, 2): 0.5, (1, 3): 0.5, (2, 3): 0.5, (1, 4): 0.4, (3, 4): 0.6}
        records = _records_from(values)
        with pytest.warns(DegenerateDistributionWarning):
            stats = local_threshold(build_s(records, 2), 2)
        got = {(c.master_id, c.target_id) for c in select_candidates(records, stats, self._corpus(4))}
        assert stats.iqr == 0.0
        assert got == {pair for pair, v in values.items() if v >= stats.q3}

    def test_scan_covers_all_records_not_only_topk_support(self):
        # Pair (10, 11) is in nobody's top-1 list (both endpoints have a
        # better partner in 9), yet clears the fence: the linear scan over
        # the whole record set must pick it up anyway.
        rng = random.Random(2)
        values = {}
        for i in range(1, 9):
            for j in range(i + 1, 9):
                values[(i, j)] = 0.28 + rng.random() * 0.04
        for i in range(1, 9):
            for j in (9, 10, 11):
                values[(i, j)] = 0.05 + rng.random() * 0.02
        values[(9, 10)] = 0.92
        values[(9, 11)] = 0.90
        values[(10, 11)] = 0.85
        records = _records_from(values)
        support = top_k(records, 1)
        assert (10, 11) not in support
        stats = local_threshold(build_s(records, 1), 1)
        assert stats.t_related < 0.85
        got = {(c.master_id, c.target_id) for c in select_candidates(records, stats, self._corpus(11))}
        assert (10, 11) in got

    def test_missing_corpus_id_is_integrity_error(self):
        records = _records_from({(1, 2): 0.9})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            stats = local_threshold([0.5], k=1)
        with pytest.raises(IntegrityError):
            select_candidates(records, stats, self._corpus(1))

    def test_sorted_by_value_desc_then_ids(self):
        values = {(1, 2): 0.9, (1, 3): 0.95, (2, 3): 0.9, (1, 4): 0.2, (2, 4): 0.2, (3, 4): 0.2}
        records = _records_from(values)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            stats = local_threshold([0.2, 0.25, 0.3], k=1)
        got = select_candidates(records, stats, self._corpus(4))
        keys = [(c.master_id, c.target_id) for c in got if c.value >= 0.9]
        assert keys == [(1, 3), (1, 2), (2, 3)]


class TestThresholdProperties:
    def test_conditional_monotone_subset(self):
        """If the K=10 fence sits at or below the K=5 fence, R(5) ⊆ R(10)."""
        rng = random.Random(11)
        for _ in range(25):
            records = _random_records(rng, rng.randint(5, 25))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateDistributionWarning)
                t5 = local_threshold(build_s(records, 5), 5)
                t10 = local_threshold(build_s(records, 10), 10)
            r5 = {(r.master_id, r.target_id) for r in records if r.value >= t5.t_related}
            r10 = {(r.master_id, r.target_id) for r in records if r.value >= t10.t_related}
            if t10.t_related <= t5.t_related:
                assert r5 <= r10

    def test_scaling_by_power_of_two_preserves_membership_exactly(self):
        rng = random.Random(5)
        corpus = [make_discussion(i) for i in range(1, 16)]
        records = _random_records(rng, 15)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            base = local_threshold(build_s(records, 4), 4)
            base_r = {
                (c.master_id, c.target_id)
                for c in select_candidates(records, base, corpus)
            }
            for c in (0.5, 0.25, 2.0):  # dyadic scaling is exact in floats
                scaled_records = [
                    SimilarityRecord(r.master_id, r.target_id, r.value * c) for r in records
                ]
                scaled = local_threshold(build_s(scaled_records, 4), 4)
                assert scaled.q1 == base.q1 * c
                assert scaled.q3 == base.q3 * c
                assert scaled.iqr == base.iqr * c
                assert scaled.t_related == base.t_related * c
                scaled_r = {
                    (r.master_id, r.target_id)
                    for r in select_candidates(scaled_records, scaled, corpus)
                }
                assert scaled_r == base_r

    def test_scaling_by_arbitrary_constant_scales_stats(self):
        rng = random.Random(6)
        records = _random_records(rng, 12)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDistributionWarning)
            base = local_threshold(build_s(records, 3), 3)
            for c in (3.0, 0.1, 1.7):
                scaled_records = [
                    SimilarityRecord(r.master_id, r.target_id, r.value * c) for r in records
                ]
                scaled = local_threshold(build_s(scaled_records, 3), 3)
                assert scaled.q1 == pytest.approx(base.q1 * c, rel=1e-12)
                assert scaled.q3 == pytest.approx(base.q3 * c, rel=1e-12)
                assert scaled.t_related == pytest.approx(base.t_related * c, rel=1e-12)
