"""Human-judgment ingestion and precision / agreement metrics.

Evaluators label each candidate pair ``D`` (duplicate), ``R`` (related),
or ``N`` (not related); duplicates are a subtype of related, so both D and
R count as true positives. Precision is::

    precision = true_positives / denominator

where the denominator is either the full candidate set (``all_candidates``,
the default: unjudged pairs count against precision) or only the judged
pairs (``judged_only``).

Judgments persist append-only as CSV with the header
``master_id,target_id,label,evaluator,comment,judged_at``. A later judgment
by the same evaluator for the same pair supersedes the earlier one; pairs
judged by several evaluators are true positives only on a strict majority
of D/R labels (exact ties resolve to N, the conservative reading).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import format_timestamp, parse_timestamp
from .errors import (
    InputError,
    NoJudgmentsError,
    UnknownPairError,
    ValidationError,
)

LABELS = ("D", "R", "N")
RELATED_LABELS = frozenset({"D", "R"})
JUDGMENT_HEADER = ("master_id", "target_id", "label", "evaluator", "comment", "judged_at")

DENOMINATOR_ALL = "all_candidates"
DENOMINATOR_JUDGED = "judged_only"

METRICS_FORMAT = "doppel-metrics/1"


@dataclass(frozen=True)
class Judgment:
    """One evaluator's label for one candidate pair."""

    master_id: int
    target_id: int
    label: str
    evaluator: str
    comment: str = ""
    judged_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValidationError(f"label must be one of {', '.join(LABELS)}, got {self.label!r}")
        if not self.evaluator:
            raise ValidationError("evaluator must be non-empty")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.master_id, self.target_id)


@dataclass(frozen=True)
class PrecisionReport:
    """Aggregate of judgments over one candidate set."""

    total_candidates: int
    judged: int
    unjudged: int
    true_positives: int
    precision: float | None
    denominator: str
    label_counts: Mapping[str, int]


def load_judgments(path: str | Path) -> list[Judgment]:
    """Read a judgment CSV, preserving append order."""
    path = Path(path)
    if not path.exists():
        return []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read judgments {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if header != list(JUDGMENT_HEADER):
        raise ValidationError(f"unexpected judgment file header: {header}")
    judgments = []
    for row in reader:
        if not row:
            continue
        master, target, label, evaluator, comment, judged_at = row
        judgments.append(
            Judgment(
                master_id=int(master),
                target_id=int(target),
                label=label,
                evaluator=evaluator,
                comment=comment,
                judged_at=parse_timestamp(judged_at),
            )
        )
    return judgments


def _judgment_row(j: Judgment) -> list:
    return [j.master_id, j.target_id, j.label, j.evaluator, j.comment, format_timestamp(j.judged_at)]


def save_judgments(judgments: Iterable[Judgment], path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(JUDGMENT_HEADER)
    for j in judgments:
        writer.writerow(_judgment_row(j))
    try:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write judgments {path}: {exc}") from exc


def append_judgment(j: Judgment, path: str | Path) -> None:
    """Append one judgment, creating the file (with header) if needed."""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if new_file:
        writer.writerow(JUDGMENT_HEADER)
    writer.writerow(_judgment_row(j))
    try:
        with path.open("a", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise InputError(f"cannot append judgment to {path}: {exc}") from exc


def effective_labels(judgments: Sequence[Judgment]) -> dict[tuple[int, int], dict[str, str]]:
    """Latest label per (pair, evaluator): re-judging supersedes.

    Later ``judged_at`` wins; equal timestamps fall back to append order.
    """
    latest: dict[tuple[int, int], dict[str, tuple[datetime, int, str]]] = {}
    for seq, j in enumerate(judgments):
        per_pair = latest.setdefault(j.pair, {})
        current = per_pair.get(j.evaluator)
        if current is None or (j.judged_at, seq) >= current[:2]:
            per_pair[j.evaluator] = (j.judged_at, seq, j.label)
    return {
        pair: {evaluator: label for evaluator, (_, _, label) in per_evaluator.items()}
        for pair, per_evaluator in latest.items()
    }


def consensus_related(labels: Iterable[str]) -> bool:
    """Strict majority of evaluators said D or R; ties resolve to N."""
    labels = list(labels)
    related = sum(1 for label in labels if label in RELATED_LABELS)
    return related * 2 > len(labels)


def precision(
    candidates: Iterable[tuple[int, int]],
    judgments: Sequence[Judgment],
    denominator: str = DENOMINATOR_ALL,
) -> PrecisionReport:
    """Score a candidate set against human judgments.

    Args:
        candidates: the run's pair keys ``(master_id, target_id)``.
        judgments: raw judgment stream (superseding applied here).
        denominator: ``all_candidates`` or ``judged_only``.

    Raises:
        UnknownPairError: a judgment references a pair outside the set.
        NoJudgmentsError: ``judged_only`` with zero judged pairs.
        ValidationError: empty candidate set or unknown denominator.
    """
    if denominator not in (DENOMINATOR_ALL, DENOMINATOR_JUDGED):
        raise ValidationError(f"unknown denominator policy: {denominator!r}")
    pair_set = set(candidates)
    if not pair_set:
        raise ValidationError("candidate set is empty; precision is undefined")
    by_pair = effective_labels(judgments)
    for pair in by_pair:
        if pair not in pair_set:
            raise UnknownPairError(f"judgment references unknown pair {pair}")

    label_counts = {label: 0 for label in LABELS}
    true_positives = 0
    for pair, per_evaluator in by_pair.items():
        labels = list(per_evaluator.values())
        if consensus_related(labels):
            true_positives += 1
            # Histogram the consensus: D only if duplicates outvote related.
            d_votes = sum(1 for label in labels if label == "D")
            r_votes = sum(1 for label in labels if label == "R")
            label_counts["D" if d_votes > r_votes else "R"] += 1
        else:
            label_counts["N"] += 1

    judged = len(by_pair)
    unjudged = len(pair_set) - judged
    if denominator == DENOMINATOR_JUDGED:
        if judged == 0:
            raise NoJudgmentsError("no judgments yet; judged_only precision is undefined")
        value = true_positives / judged
    else:
        value = true_positives / len(pair_set)
    return PrecisionReport(
        total_candidates=len(pair_set),
        judged=judged,
        unjudged=unjudged,
        true_positives=true_positives,
        precision=value,
        denominator=denominator,
        label_counts=label_counts,
    )


def percent_display(value: float) -> str:
    """Two-decimal percentage, truncated (31/34 displays as 91.17%)."""
    basis = math.floor(value * 10000 + 1e-6)
    return f"{basis / 100:.2f}%"


def cohen_kappa(judgments_a: Sequence[str], judgments_b: Sequence[str]) -> float:
    """Chance-corrected agreement between two aligned label sequences.

    kappa = (p_o - p_e) / (1 - p_e), computed in exact rational arithmetic
    over the D/R/N label space (any label values are accepted). When both
    raters agree everywhere and chance agreement is 1, kappa is defined
    as 1.

    Raises:
        ValidationError: length mismatch or empty input.
    """
    if len(judgments_a) != len(judgments_b):
        raise ValidationError(
            f"label sequences are misaligned: {len(judgments_a)} vs {len(judgments_b)}"
        )
    n = len(judgments_a)
    if n == 0:
        raise ValidationError("kappa of empty label sequences is undefined")
    agree = sum(1 for x, y in zip(judgments_a, judgments_b) if x == y)
    p_o = Fraction(agree, n)
    labels = set(judgments_a) | set(judgments_b)
    p_e = Fraction(0)
    for label in labels:
        ca = sum(1 for x in judgments_a if x == label)
        cb = sum(1 for y in judgments_b if y == label)
        p_e += Fraction(ca * cb, n * n)
    if p_e == 1:
        # Chance agreement of 1 forces both raters onto a single shared
        # label, hence full observed agreement: kappa is defined as 1.
        return 1.0
    return float((p_o - p_e) / (1 - p_e))


def mean_precision(reports: Sequence["PrecisionReport | float"]) -> float:
    """Unweighted arithmetic mean of precision values."""
    if not reports:
        raise ValidationError("mean precision of an empty sequence is undefined")
    values = [r.precision if isinstance(r, PrecisionReport) else float(r) for r in reports]
    if any(v is None for v in values):
        raise ValidationError("cannot average an undefined precision")
    return sum(values) / len(values)


def metrics_document(
    candidates: Iterable[tuple[int, int]],
    judgments: Sequence[Judgment],
    denominator: str = DENOMINATOR_ALL,
) -> dict:
    """Canonical metrics payload; the CLI and the review server both emit
    exactly this. Undefined precision (no candidates, or judged_only with
    nothing judged yet) becomes an explicit marker rather than an error."""
    if denominator not in (DENOMINATOR_ALL, DENOMINATOR_JUDGED):
        raise ValidationError(f"unknown denominator policy: {denominator!r}")
    pair_set = set(candidates)
    report = None
    if pair_set:
        try:
            report = precision(pair_set, judgments, denominator)
        except NoJudgmentsError:
            report = None
    if report is None:
        by_pair = effective_labels(judgments)
        for pair in by_pair:
            if pair not in pair_set:
                raise UnknownPairError(f"judgment references unknown pair {pair}")
        report = PrecisionReport(
            total_candidates=len(pair_set),
            judged=len(by_pair),
            unjudged=len(pair_set) - len(by_pair),
            true_positives=0,
            precision=None,
            denominator=denominator,
            label_counts={label: 0 for label in LABELS},
        )
    undefined = report.precision is None
    return {
        "format": METRICS_FORMAT,
        "denominator": denominator,
        "total_candidates": report.total_candidates,
        "judged": report.judged,
        "unjudged": report.unjudged,
        "true_positives": report.true_positives,
        "precision": report.precision,
        "precision_display": None if undefined else percent_display(report.precision),
        "undefined": undefined,
        "label_counts": dict(report.label_counts),
    }


def render_metrics(document: Mapping) -> str:
    """Single canonical serialization used by every surface."""
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
