from __future__ import annotations

import random

import numpy as np
import pytest

from doppel.embedding import hash_embed
from doppel.errors import ValidationError
from doppel.similarity import (
    SimilarityRecord,
    cosine,
    pairwise,
    read_similarity_csv,
    records_to_csv,
    write_similarity_csv,
)

from conftest import make_doc, random_docs
from oracles import naive_pairwise


class TestCosine:
    def test_self_similarity(self):
        for v in [np.array([1.0, 2.0, 3.0]), hash_embed("a b c", 16)]:
            assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_closed_form_sqrt2_over_2(self):
        got = cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert got == pytest.approx(0.7071067811865475, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=12), rng.normal(size=12)
        assert cosine(a, b) == cosine(b, a)

    def test_dim_mismatch(self):
        with pytest.raises(ValidationError):
            cosine(np.ones(3), np.ones(4))

    def test_zero_norm(self):
        with pytest.raises(ValidationError):
            cosine(np.zeros(3), np.ones(3))

    def test_clamped_into_unit_interval(self):
        v = np.full(64, 0.1)
        assert cosine(v, v) <= 1.0


def _docs_and_vectors(n: int, seed: int = 0, dim: int = 32):
    rng = random.Random(seed)
    docs = random_docs(rng, n)
    vectors = [hash_embed(d.text, dim) for d in docs]
    return docs, vectors


class TestPairwise:
    @pytest.mark.parametrize("n", [0, 1, 2, 4, 10, 50])
    def test_pair_count(self, n):
        docs, vectors = _docs_and_vectors(n)
        records = pairwise(docs, vectors)
        assert len(records) == n * (n - 1) // 2

    def test_role_assignment_by_age_then_id(self):
        docs, vectors = _docs_and_vectors(10, seed=4)
        by_id = {d.discussion_id: d for d in docs}
        for r in pairwise(docs, vectors):
            master, target = by_id[r.master_id], by_id[r.target_id]
            assert (master.created_at, master.discussion_id) <= (
                target.created_at,
                target.discussion_id,
            )
            assert r.master_id != r.target_id

    def test_timestamp_tie_breaks_by_smaller_id(self):
        docs = [make_doc(5, "alpha beta", hours=1), make_doc(2, "gamma delta", hours=1)]
        vectors = [hash_embed(d.text, 16) for d in docs]
        (record,) = pairwise(docs, vectors)
        assert (record.master_id, record.target_id) == (2, 5)

    def test_no_duplicate_unordered_pairs(self):
        docs, vectors = _docs_and_vectors(12)
        records = pairwise(docs, vectors)
        keys = {frozenset((r.master_id, r.target_id)) for r in records}
        assert len(keys) == len(records)

    def test_matches_naive_oracle_byte_identical(self):
        docs, vectors = _docs_and_vectors(20, seed=11)
        ours = pairwise(docs, vectors)
        naive = naive_pairwise(docs, vectors)
        assert records_to_csv(ours) == records_to_csv(naive)

    def test_parallel_equals_sequential_byte_for_byte(self):
        docs, vectors = _docs_and_vectors(50, seed=5)
        sequential = pairwise(docs, vectors, workers=1)
        parallel = pairwise(docs, vectors, workers=4)
        assert records_to_csv(sequential) == records_to_csv(parallel)

    def test_input_position_swap_changes_nothing(self):
        docs, vectors = _docs_and_vectors(8, seed=9)
        base = pairwise(docs, vectors)
        order = list(range(len(docs)))
        random.Random(1).shuffle(order)
        shuffled = pairwise([docs[i] for i in order], [vectors[i] for i in order])
        assert base == shuffled

    def test_alignment_mismatch(self):
        docs, vectors = _docs_and_vectors(4)
        with pytest.raises(ValidationError):
            pairwise(docs, vectors[:-1])

    def test_duplicate_ids_rejected(self):
        docs = [make_doc(1, "a b"), make_doc(1, "c d")]
        vectors = [hash_embed(d.text, 16) for d in docs]
        with pytest.raises(ValidationError):
            pairwise(docs, vectors)

    def test_values_bounded(self):
        docs, vectors = _docs_and_vectors(15, seed=2)
        for r in pairwise(docs, vectors):
            assert -1.0 <= r.value <= 1.0


class TestSimilarityFile:
    def test_round_trip_is_exact(self, tmp_path):
        docs, vectors = _docs_and_vectors(10, seed=8)
        records = pairwise(docs, vectors)
        path = tmp_path / "sim.csv"
        write_similarity_csv(records, path)
        assert read_similarity_csv(path) == records

    def test_header(self, tmp_path):
        path = tmp_path / "sim.csv"
        write_similarity_csv([SimilarityRecord(1, 2, 0.5)], path)
        assert path.read_text().splitlines()[0] == "master_id,target_id,value"

    def test_seventeen_significant_digits(self):
        text = records_to_csv([SimilarityRecord(1, 2, 1 / 3)])
        assert "0.33333333333333331" in text

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "sim.csv"
        path.write_text("a,b,c\n1,2,0.5\n")
        with pytest.raises(ValidationError):
            read_similarity_csv(path)
