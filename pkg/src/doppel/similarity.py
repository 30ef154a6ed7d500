"""All-pairs cosine similarity with master/target role assignment.

Within a pair the master is the older post (ties broken by smaller id)
and the target the newer one; similarity is symmetric, so each unordered
pair appears exactly once. Records persist to a CSV similarity file so
threshold selection can rescan every pair without recomputation.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError, ValidationError
from .preprocess import PreparedDoc

SIMILARITY_HEADER = ("master_id", "target_id", "value")

# Tolerated floating overshoot beyond [-1, 1] before clamping.
_COSINE_EPS = 1e-9


@dataclass(frozen=True)
class SimilarityRecord:
    """One scored unordered pair; master is the older (or smaller-id) post."""

    master_id: int
    target_id: int
    value: float


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity ``dot(a, b) / (|a| * |b|)``, clamped into [-1, 1]
    only to absorb floating rounding.

    Raises:
        ValidationError: dimension mismatch or a zero-norm operand.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine undefined for zero-norm vectors")
    value = float(np.dot(a, b) / (na * nb))
    if value > 1.0:
        value = min(value, 1.0) if value - 1.0 <= _COSINE_EPS else value
    elif value < -1.0:
        value = max(value, -1.0) if -1.0 - value <= _COSINE_EPS else value
    return value


def _order_pair(doc_a: PreparedDoc, doc_b: PreparedDoc) -> tuple[int, int]:
    key_a = (doc_a.created_at, doc_a.discussion_id)
    key_b = (doc_b.created_at, doc_b.discussion_id)
    if key_a <= key_b:
        return doc_a.discussion_id, doc_b.discussion_id
    return doc_b.discussion_id, doc_a.discussion_id


def pairwise(
    docs: Sequence[PreparedDoc],
    vectors: Sequence[np.ndarray],
    workers: int = 1,
) -> list[SimilarityRecord]:
    """Score every unordered pair: exactly ``n*(n-1)/2`` records.

    Output is sorted by ``(master_id, target_id)``; with ``workers > 1``
    the upper triangle is sharded by row, and each pair's value is computed
    by the same dot-product call either way, so parallel and sequential
    runs produce identical output.

    Raises:
        ValidationError: length mismatch, duplicate ids, or a zero-norm vector.
    """
    if len(docs) != len(vectors):
        raise ValidationError(
            f"docs and vectors are misaligned: {len(docs)} vs {len(vectors)}"
        )
    n = len(docs)
    ids = [d.discussion_id for d in docs]
    if len(set(ids)) != n:
        raise ValidationError("discussion ids must be unique within a pairwise run")
    if n < 2:
        return []

    unit = []
    for v in vectors:
        v = np.asarray(v, dtype=np.float64)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValidationError("zero-norm embedding vector in pairwise input")
        unit.append(v / norm)

    def score_row(i: int) -> list[SimilarityRecord]:
        row = []
        for j in range(i + 1, n):
            value = float(np.dot(unit[i], unit[j]))
            value = min(1.0, max(-1.0, value))
            master, target = _order_pair(docs[i], docs[j])
            row.append(SimilarityRecord(master, target, value))
        return row

    if workers <= 1:
        rows = [score_row(i) for i in range(n - 1)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(score_row, range(n - 1)))

    records = [rec for row in rows for rec in row]
    records.sort(key=lambda r: (r.master_id, r.target_id))
    return records


def records_to_csv(records: Sequence[SimilarityRecord]) -> str:
    """Serialize records; values carry 17 significant digits so parsing
    them back yields bit-identical floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SIMILARITY_HEADER)
    for r in records:
        writer.writerow([r.master_id, r.target_id, format(r.value, ".17g")])
    return buf.getvalue()


def write_similarity_csv(records: Sequence[SimilarityRecord], path: str | Path) -> None:
    try:
        Path(path).write_text(records_to_csv(records), encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write similarity file {path}: {exc}") from exc


def read_similarity_csv(path: str | Path) -> list[SimilarityRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read similarity file {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != list(SIMILARITY_HEADER):
        raise ValidationError(f"unexpected similarity file header: {header}")
    return [
        SimilarityRecord(int(master), int(target), float(value))
        for master, target, value in reader
    ]
