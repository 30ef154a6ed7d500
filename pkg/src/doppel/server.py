"""HTTP backend for the candidate review UI.

Serves one loaded report and accepts judgments over a small JSON API with
a fixed, versioned path prefix:

* ``GET  /api/v1/candidates?page&page_size&unjudged_only&evaluator``
* ``POST /api/v1/judgments`` (body mirrors the judgment CSV fields)
* ``GET  /api/v1/metrics?denominator=``
* ``GET  /api/v1/report/meta``

plus static serving of the built UI bundle at ``/``. Judgments append to
the same CSV the ``evaluate`` CLI consumes, so the UI and batch workflows
interoperate with zero conversion; the metrics endpoint returns byte-for-
byte what ``evaluate`` prints. The judgment file is re-read per request,
so labels written by other tools are picked up hot; writes are serialized
through a single lock.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import format_timestamp
from .errors import DoppelError, ValidationError
from .evaluation import (
    DENOMINATOR_ALL,
    DENOMINATOR_JUDGED,
    Judgment,
    append_judgment,
    effective_labels,
    load_judgments,
    metrics_document,
    render_metrics,
)
from .report import CandidateReport, load_report, report_to_dict

API_PREFIX = "/api/v1"

_DENOMINATOR_ALIASES = {
    "all": DENOMINATOR_ALL,
    "all_candidates": DENOMINATOR_ALL,
    "judged": DENOMINATOR_JUDGED,
    "judged_only": DENOMINATOR_JUDGED,
}


def resolve_denominator(value: str) -> str:
    try:
        return _DENOMINATOR_ALIASES[value]
    except KeyError:
        raise ValidationError(f"unknown denominator policy: {value!r}") from None


class JudgmentIn(BaseModel):
    master_id: int
    target_id: int
    label: str
    evaluator: str
    comment: str = ""
    judged_at: datetime | None = None


def create_app(
    report_path: str | Path,
    judgments_path: str | Path,
    denominator: str = DENOMINATOR_ALL,
    ui_dir: str | Path | None = None,
    token: str | None = None,
) -> FastAPI:
    """Build the review app around one report and one judgment store."""
    report: CandidateReport = load_report(report_path)
    judgments_path = Path(judgments_path)
    default_denominator = resolve_denominator(denominator)
    pair_set = {(c.master_id, c.target_id) for c in report.candidates}
    write_lock = threading.Lock()

    app = FastAPI(title="doppel review server", version=report.tool_version)

    def check_token(x_doppel_token: str | None):
        if token is not None and x_doppel_token != token:
            raise HTTPException(status_code=401, detail="missing or wrong access token")

    def snapshot() -> list[Judgment]:
        return load_judgments(judgments_path)

    @app.get(API_PREFIX + "/candidates")
    def get_candidates(
        page: int = Query(1, ge=1),
        page_size: int = Query(20, ge=1, le=500),
        unjudged_only: bool = False,
        evaluator: str | None = None,
        x_doppel_token: str | None = Header(default=None),
    ):
        check_token(x_doppel_token)
        labels = effective_labels(snapshot())
        items = []
        for c in report.candidates:  # already sorted by similarity descending
            pair = (c.master_id, c.target_id)
            per_evaluator = labels.get(pair, {})
            if unjudged_only:
                if evaluator is not None:
                    if evaluator in per_evaluator:
                        continue
                elif per_evaluator:
                    continue
            items.append(
                {
                    "master_id": c.master_id,
                    "target_id": c.target_id,
                    "value": c.value,
                    "value_display": f"{c.value:.4f}",
                    "master_title": c.master_title,
                    "target_title": c.target_title,
                    "master_url": c.master_url,
                    "target_url": c.target_url,
                    "labels": per_evaluator,
                    "judged": bool(per_evaluator),
                }
            )
        total = len(items)
        start = (page - 1) * page_size
        return {
            "page": page,
            "page_size": page_size,
            "total": total,
            "items": items[start : start + page_size],
        }

    @app.post(API_PREFIX + "/judgments")
    def post_judgment(
        body: JudgmentIn,
        x_doppel_token: str | None = Header(default=None),
    ):
        check_token(x_doppel_token)
        if (body.master_id, body.target_id) not in pair_set:
            raise HTTPException(
                status_code=404,
                detail=f"pair ({body.master_id}, {body.target_id}) is not in the loaded report",
            )
        try:
            judgment = Judgment(
                master_id=body.master_id,
                target_id=body.target_id,
                label=body.label,
                evaluator=body.evaluator,
                comment=body.comment,
                judged_at=body.judged_at or datetime.now(timezone.utc),
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with write_lock:
            append_judgment(judgment, judgments_path)
        metrics = metrics_document(pair_set, snapshot(), default_denominator)
        return {"ok": True, "metrics": metrics}

    @app.get(API_PREFIX + "/metrics")
    def get_metrics(
        denominator: str | None = None,
        x_doppel_token: str | None = Header(default=None),
    ):
        check_token(x_doppel_token)
        try:
            policy = resolve_denominator(denominator) if denominator else default_denominator
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            document = metrics_document(pair_set, snapshot(), policy)
        except DoppelError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        # Byte-for-byte what `doppel evaluate` prints on the same inputs.
        return Response(content=render_metrics(document), media_type="application/json")

    @app.get(API_PREFIX + "/report/meta")
    def get_meta(x_doppel_token: str | None = Header(default=None)):
        check_token(x_doppel_token)
        data = report_to_dict(report)
        return {
            "format": data["format"],
            "tool_version": data["tool_version"],
            "created_at": format_timestamp(report.created_at),
            "config": data["config"],
            "corpus_summary": data["corpus_summary"],
            "threshold_stats": data["threshold_stats"],
            "total_candidates": len(report.candidates),
            "denominator": default_denominator,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
