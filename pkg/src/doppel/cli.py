"""Command-line surface.

Verbs: ``run``, ``fetch``, ``evaluate``, ``serve``, ``matrix``.
Exit codes: 0 success, 2 validation error, 3 I/O error, 4 provider error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ._version import __version__
from .corpus import save_corpus
from .embedding import DEFAULT_BATCH_SIZE, DEFAULT_HASH_DIM, ProviderConfig
from .errors import DoppelError, InputError, ValidationError
from .evaluation import load_judgments, metrics_document, render_metrics
from .fetch import fetch_discussions
from .report import MatrixEntry, RunConfig, load_report, run, run_matrix

TOKEN_ENV_VAR = "RD_TOKEN"


def _provider_from_args(args: argparse.Namespace) -> ProviderConfig:
    if args.provider == "http":
        if not args.endpoint:
            raise ValidationError("--endpoint is required with --provider http")
        return ProviderConfig(kind="http", endpoint=args.endpoint, dim=args.dim or DEFAULT_HASH_DIM)
    return ProviderConfig(kind="hash", dim=args.dim or DEFAULT_HASH_DIM)


def _cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig(
        corpus_path=Path(args.corpus),
        k=args.k,
        out_path=Path(args.out),
        project=args.project,
        category=args.category,
        provider=_provider_from_args(args),
    )
    report = run(config, workers=args.workers)
    stats = report.threshold_stats
    print(
        f"{len(report.candidates)} candidate pair(s) at threshold {stats.t_related:.4f} "
        f"(size_s={stats.size_s}, k={stats.k})"
    )
    print(f"report: {config.out_path}")
    print(f"similarity file: {config.similarity_path}")
    print(f"candidates csv: {config.candidates_csv_path}")
    return 0


def _cmd_fetch(args: argparse.Namespace) -> int:
    token = os.environ.get(TOKEN_ENV_VAR)
    if not token:
        raise ValidationError(f"set {TOKEN_ENV_VAR} to a token with discussions read scope")
    discussions = fetch_discussions(args.repo, auth=token, page_size=args.page_size)
    save_corpus(discussions, args.out)
    print(f"fetched {len(discussions)} discussion(s) from {args.repo} into {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    report = load_report(args.report)
    judgments = load_judgments(args.judgments)
    pairs = [(c.master_id, c.target_id) for c in report.candidates]
    denominator = "all_candidates" if args.denominator == "all" else "judged_only"
    document = metrics_document(pairs, judgments, denominator)
    sys.stdout.write(render_metrics(document))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    ui_dir = args.ui if args.ui else _default_ui_dir()
    app = create_app(
        report_path=args.report,
        judgments_path=args.judgments,
        denominator="all_candidates" if args.denominator == "all" else "judged_only",
        ui_dir=ui_dir,
        token=args.token,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _default_ui_dir() -> str | None:
    # A built frontend bundle living next to the installed package or the
    # repository checkout is picked up automatically.
    here = Path(__file__).resolve()
    for base in (here.parents[2], here.parents[1]):
        candidate = base / "frontend" / "dist"
        if candidate.is_dir():
            return str(candidate)
    return None


def _cmd_matrix(args: argparse.Namespace) -> int:
    spec_path = Path(args.spec)
    try:
        raw = spec_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read matrix spec {spec_path}: {exc}") from exc
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"matrix spec is not valid JSON: {exc.msg}") from exc
    if not isinstance(spec, list):
        raise ValidationError("matrix spec must be a JSON list of run configs")

    configs = [run_config_from_dict(entry, index=i) for i, entry in enumerate(spec)]
    entries = run_matrix(configs, workers=args.workers)
    failures = [e for e in entries if e.error is not None]
    for entry in entries:
        _print_matrix_entry(entry)
    print(f"{len(entries) - len(failures)}/{len(entries)} config(s) succeeded")
    if failures:
        return failures[0].error.exit_code
    return 0


def _print_matrix_entry(entry: MatrixEntry) -> None:
    label = (
        f"p={entry.config.project or '*'}|c={entry.config.category or 'ALL'}"
        f"|K={entry.config.k}"
    )
    if entry.report is not None:
        print(
            f"ok   {label}: {len(entry.report.candidates)} candidate(s), "
            f"threshold {entry.report.threshold_stats.t_related:.4f} -> {entry.config.out_path}"
        )
    else:
        stage = getattr(entry.error, "stage", None)
        where = f" [{stage}]" if stage else ""
        print(f"fail {label}{where}: {entry.error}")


def run_config_from_dict(entry: dict, index: int = 0) -> RunConfig:
    """Build a RunConfig from one matrix-spec object.

    Expected keys: ``corpus``, ``k``, ``out``; optional ``project``,
    ``category``, ``provider`` (object with ``kind`` and provider fields).
    """
    if not isinstance(entry, dict):
        raise ValidationError(f"matrix entry {index} must be an object")
    missing = [key for key in ("corpus", "k", "out") if key not in entry]
    if missing:
        raise ValidationError(f"matrix entry {index} misses key(s): {', '.join(missing)}")
    provider_spec = entry.get("provider", {"kind": "hash"})
    if not isinstance(provider_spec, dict):
        raise ValidationError(f"matrix entry {index}: provider must be an object")
    provider = ProviderConfig(
        kind=provider_spec.get("kind", "hash"),
        dim=provider_spec.get("dim", DEFAULT_HASH_DIM),
        endpoint=provider_spec.get("endpoint"),
        batch_size=provider_spec.get("batch_size", DEFAULT_BATCH_SIZE),
    )
    return RunConfig(
        corpus_path=Path(entry["corpus"]),
        k=entry["k"],
        out_path=Path(entry["out"]),
        project=entry.get("project"),
        category=entry.get("category"),
        provider=provider,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doppel",
        description="Detect related (duplicate or near-duplicate) forum discussions.",
    )
    parser.add_argument("--version", action="version", version=f"doppel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run detection over a corpus")
    p_run.add_argument("--corpus", required=True, help="JSONL corpus path")
    p_run.add_argument("--project", default=None, help="project filter (p)")
    p_run.add_argument(
        "--category",
        default="all",
        help="category filter (c): qa | ideas | all | any raw label",
    )
    p_run.add_argument("--k", type=int, required=True, help="top-K neighbors per post")
    p_run.add_argument("--provider", choices=("hash", "http"), default="hash")
    p_run.add_argument("--dim", type=int, default=None, help="hash provider dimension")
    p_run.add_argument("--endpoint", default=None, help="http provider base URL")
    p_run.add_argument("--out", required=True, help="report output path (JSON)")
    p_run.add_argument("--workers", type=int, default=1, help=argparse.SUPPRESS)
    p_run.set_defaults(func=_cmd_run)

    p_fetch = sub.add_parser("fetch", help="download a repository's discussions")
    p_fetch.add_argument("--repo", required=True, help="repository slug OWNER/NAME")
    p_fetch.add_argument("--out", required=True, help="JSONL corpus output path")
    p_fetch.add_argument("--page-size", type=int, default=50)
    p_fetch.set_defaults(func=_cmd_fetch)

    p_eval = sub.add_parser("evaluate", help="compute precision from judgments")
    p_eval.add_argument("--report", required=True)
    p_eval.add_argument("--judgments", required=True)
    p_eval.add_argument("--denominator", choices=("all", "judged"), default="all")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_serve = sub.add_parser("serve", help="serve the review UI and API")
    p_serve.add_argument("--report", required=True)
    p_serve.add_argument("--judgments", required=True)
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--denominator", choices=("all", "judged"), default="all")
    p_serve.add_argument("--ui", default=None, help="directory with the built UI bundle")
    p_serve.add_argument("--token", default=None, help="shared access token (optional)")
    p_serve.set_defaults(func=_cmd_serve)

    p_matrix = sub.add_parser("matrix", help="run several configs from a JSON spec")
    p_matrix.add_argument("--spec", required=True, help="JSON list of run configs")
    p_matrix.add_argument("--workers", type=int, default=1, help=argparse.SUPPRESS)
    p_matrix.set_defaults(func=_cmd_matrix)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DoppelError as exc:
        stage = getattr(exc, "stage", None)
        where = f" [{stage}]" if stage else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
