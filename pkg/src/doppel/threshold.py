"""Local-threshold selection: top-K neighborhood distribution, quartiles,
the boxplot upper inner fence, and the candidate set.

For each post, the values of its K most similar partners feed a pooled
distribution S (unique pairs only: a pair picked from both ends counts
once). The local threshold is S's classical outlier boundary::

    T_related = Q3 + 1.5 * IQR        (upper inner fence)

Every scored pair at or above the fence -- scanning all records, not just
the top-K support -- becomes a candidate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Discussion
from .errors import DegenerateDistributionWarning, DistributionEmptyError, IntegrityError, ValidationError
from .similarity import SimilarityRecord


@dataclass(frozen=True)
class ThresholdStats:
    """Summary of one run's distribution S and the derived threshold."""

    k: int
    size_s: int
    q1: float
    q2: float
    q3: float
    iqr: float
    t_related: float


@dataclass(frozen=True)
class CandidatePair:
    """One pair at or above the local threshold, enriched for human review."""

    master_id: int
    target_id: int
    value: float
    master_title: str
    target_title: str
    master_url: str | None = None
    target_url: str | None = None


def top_k(records: Sequence[SimilarityRecord], k: int) -> set[tuple[int, int]]:
    """Unique-pair support of S: each post's k best partners, pooled.

    Partners rank by (value desc, partner id asc); a post with fewer than
    k partners contributes them all. Ties at the k-th rank cut
    deterministically rather than expanding.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    neighbors: dict[int, list[tuple[float, int, tuple[int, int]]]] = {}
    for r in records:
        pair = (r.master_id, r.target_id)
        neighbors.setdefault(r.master_id, []).append((-r.value, r.target_id, pair))
        neighbors.setdefault(r.target_id, []).append((-r.value, r.master_id, pair))
    support: set[tuple[int, int]] = set()
    for partners in neighbors.values():
        partners.sort()
        support.update(pair for _, _, pair in partners[:k])
    return support


def build_s(records: Sequence[SimilarityRecord], k: int) -> list[float]:
    """The distribution S: values of the unique top-k pairs, ascending."""
    if not records:
        raise DistributionEmptyError("no similarity records; cannot build a distribution")
    support = top_k(records, k)
    values = [r.value for r in records if (r.master_id, r.target_id) in support]
    values.sort()
    return values


def percentile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between closest ranks of an ascending sequence.

    ``r = q * (m - 1) / 100``; the result interpolates between the floor
    and ceiling ranks, hitting the endpoints exactly at q=0 and q=100.
    """
    if len(sorted_values) == 0:
        raise DistributionEmptyError("percentile of an empty sequence")
    if not 0.0 <= q <= 100.0:
        raise ValidationError(f"q must be in [0, 100], got {q}")
    m = len(sorted_values)
    r = q * (m - 1) / 100.0
    lo = math.floor(r)
    if lo == m - 1:
        return float(sorted_values[-1])
    frac = r - lo
    return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))


def local_threshold(s: Sequence[float], k: int) -> ThresholdStats:
    """Quartiles, IQR, and the upper inner fence of a sorted distribution.

    An IQR of zero collapses the fence onto Q3; the run proceeds but emits
    a :class:`DegenerateDistributionWarning` since every pair at Q3 or
    above will be selected.
    """
    if len(s) == 0:
        raise DistributionEmptyError("cannot derive a threshold from an empty distribution")
    q1 = percentile(s, 25)
    q2 = percentile(s, 50)
    q3 = percentile(s, 75)
    iqr = q3 - q1
    if iqr == 0.0:
        warnings.warn(
            "similarity distribution has zero IQR; threshold degenerates to Q3",
            DegenerateDistributionWarning,
            stacklevel=2,
        )
    return ThresholdStats(
        k=k, size_s=len(s), q1=q1, q2=q2, q3=q3, iqr=iqr, t_related=q3 + 1.5 * iqr
    )


def select_candidates(
    records: Sequence[SimilarityRecord],
    stats: ThresholdStats,
    corpus: Sequence[Discussion],
) -> list[CandidatePair]:
    """Scan ALL records and keep every pair with value >= the threshold.

    Candidates are enriched with titles and URLs from the corpus and sorted
    by value descending, then (master_id, target_id).

    Raises:
        IntegrityError: a record references an id absent from the corpus.
    """
    by_id: Mapping[int, Discussion] = {d.id: d for d in corpus}
    selected = []
    for r in records:
        if r.value >= stats.t_related:
            try:
                master = by_id[r.master_id]
                target = by_id[r.target_id]
            except KeyError as exc:
                raise IntegrityError(
                    f"similarity record references unknown discussion id {exc.args[0]}"
                ) from exc
            selected.append(
                CandidatePair(
                    master_id=r.master_id,
                    target_id=r.target_id,
                    value=r.value,
                    master_title=master.title,
                    target_title=target.title,
                    master_url=master.url,
                    target_url=target.url,
                )
            )
    selected.sort(key=lambda c: (-c.value, c.master_id, c.target_id))
    return selected
