"""Run orchestration and report documents.

A run executes load -> filter -> prepare -> embed -> pairwise -> build S
-> threshold -> select, then writes three artifacts next to each other:

* ``<out>`` -- the versioned JSON report (config echo, corpus summary,
  threshold statistics, candidate pairs);
* ``<stem>.similarity.csv`` -- every scored pair, full precision;
* ``<stem>.candidates.csv`` -- the candidate pairs with titles, one row
  per pair, similarity at 4 decimals, for spreadsheet-based judging.

With the hash provider a run is a pure function of its config: the report
timestamp is the newest post in the filtered corpus (the data snapshot
time), not the wall clock, so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import jsonschema

from ._version import __version__
from .corpus import (
    CorpusFilter,
    Discussion,
    apply_filter,
    canonicalize_category,
    format_timestamp,
    load_corpus,
    parse_timestamp,
)
from .embedding import ProviderConfig, embed_batch
from .errors import DoppelError, InputError, TooFewDocumentsError, ValidationError
from .preprocess import prepare_corpus
from .similarity import SimilarityRecord, pairwise, records_to_csv
from .threshold import CandidatePair, ThresholdStats, build_s, local_threshold, select_candidates

logger = logging.getLogger(__name__)

REPORT_FORMAT = "doppel-report/1"

CANDIDATES_HEADER = (
    "master_id",
    "target_id",
    "value",
    "master_title",
    "target_title",
    "master_url",
    "target_url",
)

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "format",
        "tool_version",
        "created_at",
        "config",
        "corpus_summary",
        "threshold_stats",
        "candidates",
    ],
    "additionalProperties": False,
    "properties": {
        "format": {"const": REPORT_FORMAT},
        "tool_version": {"type": "string"},
        "created_at": {"type": "string"},
        "config": {
            "type": "object",
            "required": ["corpus_path", "project", "category", "k", "provider"],
            "additionalProperties": False,
            "properties": {
                "corpus_path": {"type": "string"},
                "project": {"type": ["string", "null"]},
                "category": {"type": ["string", "null"]},
                "k": {"type": "integer", "minimum": 1},
                "provider": {
                    "type": "object",
                    "required": ["kind", "dim", "endpoint", "batch_size"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["hash", "http"]},
                        "dim": {"type": "integer"},
                        "endpoint": {"type": ["string", "null"]},
                        "batch_size": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "corpus_summary": {
            "type": "object",
            "required": ["loaded", "filtered", "prepared", "dropped_empty"],
            "additionalProperties": False,
            "properties": {
                "loaded": {"type": "integer", "minimum": 0},
                "filtered": {"type": "integer", "minimum": 0},
                "prepared": {"type": "integer", "minimum": 0},
                "dropped_empty": {"type": "integer", "minimum": 0},
            },
        },
        "threshold_stats": {
            "type": "object",
            "required": ["k", "size_s", "q1", "q2", "q3", "iqr", "t_related", "display"],
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "size_s": {"type": "integer", "minimum": 1},
                "q1": {"type": "number"},
                "q2": {"type": "number"},
                "q3": {"type": "number"},
                "iqr": {"type": "number"},
                "t_related": {"type": "number"},
                "display": {
                    "type": "object",
                    "additionalProperties": {"type": "string"},
                },
            },
        },
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "master_id",
                    "target_id",
                    "value",
                    "master_title",
                    "target_title",
                    "master_url",
                    "target_url",
                ],
                "additionalProperties": False,
                "properties": {
                    "master_id": {"type": "integer"},
                    "target_id": {"type": "integer"},
                    "value": {"type": "number"},
                    "master_title": {"type": "string"},
                    "target_title": {"type": "string"},
                    "master_url": {"type": ["string", "null"]},
                    "target_url": {"type": ["string", "null"]},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    """One detection run: corpus, filters, K, provider, output location."""

    corpus_path: Path
    k: int
    out_path: Path
    project: str | None = None
    category: str | None = None
    provider: ProviderConfig = ProviderConfig()

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        object.__setattr__(self, "corpus_path", Path(self.corpus_path))
        object.__setattr__(self, "out_path", Path(self.out_path))
        if self.category is not None:
            object.__setattr__(self, "category", canonicalize_category(self.category))

    @property
    def similarity_path(self) -> Path:
        return self.out_path.with_name(self.out_path.stem + ".similarity.csv")

    @property
    def candidates_csv_path(self) -> Path:
        return self.out_path.with_name(self.out_path.stem + ".candidates.csv")

    def corpus_filter(self) -> CorpusFilter:
        return CorpusFilter(project=self.project, category=self.category)

    def group_key(self) -> tuple:
        """Configs sharing this key reuse one pairwise computation."""
        return (str(self.corpus_path), self.project, self.category, self.provider)


@dataclass(frozen=True)
class CorpusSummary:
    loaded: int
    filtered: int
    prepared: int
    dropped_empty: int


@dataclass(frozen=True)
class CandidateReport:
    """Everything a reviewer needs about one run."""

    config: RunConfig
    corpus_summary: CorpusSummary
    threshold_stats: ThresholdStats
    candidates: tuple[CandidatePair, ...]
    tool_version: str
    created_at: datetime


@dataclass(frozen=True)
class MatrixEntry:
    """Outcome of one config inside a matrix run; exactly one field is set."""

    config: RunConfig
    report: CandidateReport | None = None
    error: DoppelError | None = None


@contextmanager
def _stage(name: str):
    """Tag errors with the pipeline stage they escaped from."""
    try:
        yield
    except DoppelError as exc:
        exc.stage = name
        raise


def report_to_dict(report: CandidateReport) -> dict:
    stats = report.threshold_stats
    return {
        "format": REPORT_FORMAT,
        "tool_version": report.tool_version,
        "created_at": format_timestamp(report.created_at),
        "config": {
            "corpus_path": str(report.config.corpus_path),
            "project": report.config.project,
            "category": report.config.category,
            "k": report.config.k,
            "provider": {
                "kind": report.config.provider.kind,
                "dim": report.config.provider.dim,
                "endpoint": report.config.provider.endpoint,
                "batch_size": report.config.provider.batch_size,
            },
        },
        "corpus_summary": {
            "loaded": report.corpus_summary.loaded,
            "filtered": report.corpus_summary.filtered,
            "prepared": report.corpus_summary.prepared,
            "dropped_empty": report.corpus_summary.dropped_empty,
        },
        "threshold_stats": {
            "k": stats.k,
            "size_s": stats.size_s,
            "q1": stats.q1,
            "q2": stats.q2,
            "q3": stats.q3,
            "iqr": stats.iqr,
            "t_related": stats.t_related,
            "display": {
                "q1": f"{stats.q1:.4f}",
                "q2": f"{stats.q2:.4f}",
                "q3": f"{stats.q3:.4f}",
                "iqr": f"{stats.iqr:.4f}",
                "t_related": f"{stats.t_related:.4f}",
            },
        },
        "candidates": [
            {
                "master_id": c.master_id,
                "target_id": c.target_id,
                "value": c.value,
                "master_title": c.master_title,
                "target_title": c.target_title,
                "master_url": c.master_url,
                "target_url": c.target_url,
            }
            for c in report.candidates
        ],
    }


def validate_report_dict(data: dict) -> None:
    """Schema-check a parsed report document."""
    try:
        jsonschema.validate(data, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"report does not match schema: {exc.message}") from exc


def report_from_dict(data: dict, out_path: str | Path = "report.json") -> CandidateReport:
    """Rebuild a :class:`CandidateReport`; ``parse . serialize`` is identity."""
    validate_report_dict(data)
    cfg = data["config"]
    config = RunConfig(
        corpus_path=Path(cfg["corpus_path"]),
        k=cfg["k"],
        out_path=Path(out_path),
        project=cfg["project"],
        category=cfg["category"],
        provider=ProviderConfig(**cfg["provider"]),
    )
    summary = CorpusSummary(**data["corpus_summary"])
    raw_stats = dict(data["threshold_stats"])
    raw_stats.pop("display", None)
    stats = ThresholdStats(**raw_stats)
    candidates = tuple(CandidatePair(**c) for c in data["candidates"])
    return CandidateReport(
        config=config,
        corpus_summary=summary,
        threshold_stats=stats,
        candidates=candidates,
        tool_version=data["tool_version"],
        created_at=parse_timestamp(data["created_at"]),
    )


def render_report(report: CandidateReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"


def render_candidates_csv(candidates: Sequence[CandidatePair]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CANDIDATES_HEADER)
    for c in candidates:
        writer.writerow(
            [
                c.master_id,
                c.target_id,
                f"{c.value:.4f}",
                c.master_title,
                c.target_title,
                c.master_url or "",
                c.target_url or "",
            ]
        )
    return buf.getvalue()


def _write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise InputError(f"cannot write {path}: {exc}") from exc


def load_report(path: str | Path) -> CandidateReport:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read report {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"report {path} is not valid JSON: {exc.msg}") from exc
    return report_from_dict(data, out_path=path)


@dataclass
class _SharedRun:
    """Pairwise stage output shared across K values for one filter group."""

    summary_base: tuple[int, int, int, int]
    corpus: list[Discussion]
    records: list[SimilarityRecord]
    created_at: datetime


def _execute_shared(config: RunConfig, workers: int = 1) -> _SharedRun:
    with _stage("load"):
        corpus = load_corpus(config.corpus_path)
    with _stage("filter"):
        filtered = apply_filter(corpus, config.corpus_filter())
    with _stage("prepare"):
        docs, stats = prepare_corpus(filtered)
        if len(docs) < 2:
            raise TooFewDocumentsError(
                f"{len(docs)} document(s) left after preprocessing; need at least 2"
            )
    with _stage("embed"):
        vectors = embed_batch(config.provider, docs)
    with _stage("pairwise"):
        records = pairwise(docs, vectors, workers=workers)
    created_at = max(d.created_at for d in filtered)
    summary = (len(corpus), len(filtered), len(docs), stats.dropped_empty)
    return _SharedRun(summary, filtered, records, created_at)


def _finish_run(config: RunConfig, shared: _SharedRun) -> CandidateReport:
    with _stage("threshold"):
        s = build_s(shared.records, config.k)
        stats = local_threshold(s, config.k)
    with _stage("select"):
        candidates = select_candidates(shared.records, stats, shared.corpus)
    loaded, filtered, prepared, dropped = shared.summary_base
    report = CandidateReport(
        config=config,
        corpus_summary=CorpusSummary(loaded, filtered, prepared, dropped),
        threshold_stats=stats,
        candidates=tuple(candidates),
        tool_version=__version__,
        created_at=shared.created_at,
    )
    with _stage("write"):
        _write_atomic(config.out_path, render_report(report))
        _write_atomic(config.similarity_path, records_to_csv(shared.records))
        _write_atomic(config.candidates_csv_path, render_candidates_csv(candidates))
    logger.info(
        "run %s: %d candidates at threshold %.4f (size_s=%d)",
        config.out_path,
        len(candidates),
        stats.t_related,
        stats.size_s,
    )
    return report


def run(config: RunConfig, workers: int = 1) -> CandidateReport:
    """Execute one full detection run and write its artifacts.

    Raises:
        DoppelError subclasses, tagged with a ``stage`` attribute naming
        the pipeline stage that failed.
    """
    shared = _execute_shared(config, workers=workers)
    return _finish_run(config, shared)


def run_matrix(configs: Sequence[RunConfig], workers: int = 1) -> list[MatrixEntry]:
    """Run several configs; pairwise computation is shared across K values
    for the same (corpus, project, category, provider) and one config's
    failure never aborts its siblings."""
    shared_cache: dict[tuple, _SharedRun | DoppelError] = {}
    entries: list[MatrixEntry] = []
    for config in configs:
        key = config.group_key()
        if key not in shared_cache:
            try:
                shared_cache[key] = _execute_shared(config, workers=workers)
            except DoppelError as exc:
                shared_cache[key] = exc
        shared = shared_cache[key]
        if isinstance(shared, DoppelError):
            entries.append(MatrixEntry(config=config, error=shared))
            continue
        try:
            entries.append(MatrixEntry(config=config, report=_finish_run(config, shared)))
        except DoppelError as exc:
            entries.append(MatrixEntry(config=config, error=exc))
    return entries
