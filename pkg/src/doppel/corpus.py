"""Discussion corpus: loading, validation, saving, and filtering.

A corpus is a JSONL file, one discussion per line, with the schema::

    {"id": int, "project": str, "category": str, "author": str,
     "created_at": ISO-8601 str, "title": str, "body": str, "url": str?}

Timestamps are normalized to UTC on ingest. Raw category labels are kept
verbatim on each record; the Q&A / Ideas / ALL grouping exists only inside
:class:`CorpusFilter` so filtering never mutates data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateKeyError, InputError, ParseError, ValidationError

CATEGORY_ALL = "ALL"
CATEGORY_QA = "Q&A"
CATEGORY_IDEAS = "Ideas"

# Raw forum labels covered by each standardized group (matched case-insensitively).
QA_RAW_LABELS = frozenset({"q-a", "help"})
IDEAS_RAW_LABELS = frozenset({"ideas", "ideas-feature-requests"})

_REQUIRED_FIELDS = ("id", "project", "category", "author", "created_at", "title", "body")


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp and normalize it to UTC.

    Accepts a trailing ``Z`` and any fixed offset; naive timestamps are
    taken to already be UTC.
    """
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    """Canonical UTC serialization (``...Z`` form) used in every file we write."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    iso = dt.astimezone(timezone.utc).isoformat()
    if iso.endswith("+00:00"):
        iso = iso[:-6] + "Z"
    return iso


@dataclass(frozen=True)
class Discussion:
    """One forum post. ``(project, id)`` is unique within a corpus."""

    id: int
    project: str
    category: str
    author: str
    created_at: datetime
    title: str
    body: str
    url: str | None = None

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id <= 0:
            raise ValidationError(f"discussion id must be a positive integer, got {self.id!r}")
        if not self.title:
            raise ValidationError(f"discussion {self.id}: title must be non-empty")
        if not self.category:
            raise ValidationError(f"discussion {self.id}: category must be non-empty")
        if not isinstance(self.created_at, datetime) or self.created_at.tzinfo is None:
            raise ValidationError(f"discussion {self.id}: created_at must be a tz-aware datetime")

    @property
    def key(self) -> tuple[str, int]:
        return (self.project, self.id)


def discussion_from_record(record: dict) -> Discussion:
    """Build a validated :class:`Discussion` from a parsed JSONL record."""
    if not isinstance(record, dict):
        raise ValidationError(f"record must be an object, got {type(record).__name__}")
    missing = [name for name in _REQUIRED_FIELDS if name not in record]
    if missing:
        raise ValidationError(f"missing required field(s): {', '.join(missing)}")
    try:
        created_at = parse_timestamp(record["created_at"])
    except ValueError as exc:
        raise ValidationError(f"invalid created_at: {exc}") from exc
    for name in ("project", "category", "author", "title", "body"):
        if not isinstance(record[name], str):
            raise ValidationError(f"field {name!r} must be a string")
    url = record.get("url")
    if url is not None and not isinstance(url, str):
        raise ValidationError("field 'url' must be a string when present")
    return Discussion(
        id=record["id"],
        project=record["project"],
        category=record["category"],
        author=record["author"],
        created_at=created_at,
        title=record["title"],
        body=record["body"],
        url=url,
    )


def discussion_to_record(d: Discussion) -> dict:
    record = {
        "id": d.id,
        "project": d.project,
        "category": d.category,
        "author": d.author,
        "created_at": format_timestamp(d.created_at),
        "title": d.title,
        "body": d.body,
    }
    if d.url is not None:
        record["url"] = d.url
    return record


def load_corpus(path: str | Path, format: str = "jsonl") -> list[Discussion]:
    """Load a corpus file, preserving file order.

    Args:
        path: JSONL file, one discussion per line (blank lines ignored).
        format: only ``jsonl`` is supported.

    Raises:
        InputError: the file does not exist or cannot be read.
        ParseError: a line is not valid JSON or misses required fields
            (the error carries its 1-based line number).
        DuplicateKeyError: two lines share the same (project, id).
    """
    if format != "jsonl":
        raise ValidationError(f"unsupported corpus format: {format!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from exc

    discussions: list[Discussion] = []
    seen: set[tuple[str, int]] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        try:
            d = discussion_from_record(record)
        except ValidationError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        if d.key in seen:
            raise DuplicateKeyError(
                f"line {lineno}: duplicate discussion key (project={d.project!r}, id={d.id})"
            )
        seen.add(d.key)
        discussions.append(d)
    return discussions


def save_corpus(discussions: Iterable[Discussion], path: str | Path) -> None:
    """Write discussions as canonical JSONL; ``load_corpus`` round-trips it."""
    path = Path(path)
    lines = [json.dumps(discussion_to_record(d), ensure_ascii=False) for d in discussions]
    try:
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write corpus {path}: {exc}") from exc


def canonicalize_category(value: str) -> str:
    """Map user input onto a standardized label, passing unknown values through.

    ``qa``/``q&a`` -> ``Q&A``; ``ideas`` -> ``Ideas``; ``all`` -> ``ALL``
    (case-insensitive). Anything else is treated as a raw forum label.
    """
    lowered = value.strip().lower()
    if lowered in ("qa", "q&a"):
        return CATEGORY_QA
    if lowered == "ideas":
        return CATEGORY_IDEAS
    if lowered == "all":
        return CATEGORY_ALL
    return value.strip()


@dataclass(frozen=True)
class CorpusFilter:
    """Selects discussions by project, category group, and time window.

    ``category`` may be a standardized label (``Q&A``, ``Ideas``, ``ALL``)
    or a raw forum label matched verbatim (case-insensitive). ``ALL`` is a
    no-op. ``since``/``until`` bound ``created_at`` inclusively.
    """

    project: str | None = None
    category: str | None = None
    since: datetime | None = None
    until: datetime | None = None

    def matches_category(self, raw: str) -> bool:
        if self.category is None or self.category == CATEGORY_ALL:
            return True
        lowered = raw.lower()
        if self.category == CATEGORY_QA:
            return lowered in QA_RAW_LABELS
        if self.category == CATEGORY_IDEAS:
            return lowered in IDEAS_RAW_LABELS
        return lowered == self.category.lower()

    def matches(self, d: Discussion) -> bool:
        if self.project is not None and d.project.lower() != self.project.lower():
            return False
        if not self.matches_category(d.category):
            return False
        if self.since is not None and d.created_at < self.since:
            return False
        if self.until is not None and d.created_at > self.until:
            return False
        return True


def apply_filter(corpus: Sequence[Discussion], f: CorpusFilter) -> list[Discussion]:
    """Return the discussions matching every set field of ``f``, in input order."""
    return [d for d in corpus if f.matches(d)]
