#!/usr/bin/env python3
"""End-to-end walkthrough on a synthetic forum corpus.

Builds a small corpus with two deliberately near-duplicate question pairs,
runs detection with the hermetic hash provider, prints the threshold
statistics and candidates, and simulates a reviewer labeling them.

Run from the repository root:

    python demo/quickstart.py
"""

from __future__ import annotations

import tempfile
from datetime import datetime, timedelta, timezone
from pathlib import Path

from doppel import (
    Discussion,
    Judgment,
    ProviderConfig,
    RunConfig,
    metrics_document,
    run,
    save_corpus,
)

POSTS = [
    ("Build fails after upgrading to version ten", "Since upgrading, the production build exits immediately with a webpack chunk error."),
    ("Production build crashes after the version ten upgrade", "The build exits with a webpack chunk error right after upgrading. Worked fine before."),
    ("Dark mode toggle for the documentation site", "It would help readers if the docs supported a dark color scheme."),
    ("How do I configure a custom domain?", "I bought a domain and want the hosted site to use it. Where do the DNS records go?"),
    ("Custom domain setup question", "Which DNS records do I need so my own domain points at the hosted site?"),
    ("Feature request: export analytics as CSV", "The dashboard graphs are nice but I need raw numbers for my own reports."),
    ("Login loop on mobile browsers", "Signing in on a phone bounces back to the login page forever. Desktop works."),
    ("Can plugins declare peer dependencies?", "Packaging question about how plugins should express compatibility ranges."),
    ("Memory climbing during long dev sessions", "After a few hours of watch mode the dev server uses several gigabytes."),
    ("Where are community meeting notes kept?", "I would like to read past meeting summaries before joining a call."),
]


def build_corpus(path: Path) -> None:
    base = datetime(2024, 3, 1, 9, 0, tzinfo=timezone.utc)
    discussions = [
        Discussion(
            id=i + 1,
            project="demo",
            category="q-a",
            author=f"user{i + 1}",
            created_at=base + timedelta(hours=i),
            title=title,
            body=body,
            url=f"https://forum.example/demo/{i + 1}",
        )
        for i, (title, body) in enumerate(POSTS)
    ]
    save_corpus(discussions, path)


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="doppel-demo-"))
    corpus_path = workdir / "corpus.jsonl"
    build_corpus(corpus_path)
    print(f"corpus: {corpus_path} ({len(POSTS)} posts)")

    config = RunConfig(
        corpus_path=corpus_path,
        k=3,
        out_path=workdir / "report.json",
        provider=ProviderConfig(kind="hash", dim=256),
    )
    report = run(config)
    stats = report.threshold_stats

    print("\nthreshold statistics over the top-K similarity pool")
    print(f"  size(S) = {stats.size_s}")
    print(f"  Q1 = {stats.q1:.4f}   Q2 = {stats.q2:.4f}   Q3 = {stats.q3:.4f}")
    print(f"  IQR = {stats.iqr:.4f}   fence (threshold) = {stats.t_related:.4f}")

    print(f"\n{len(report.candidates)} candidate pair(s) above the fence:")
    for c in report.candidates:
        print(f"  [{c.value:.4f}] #{c.master_id} {c.master_title!r}")
        print(f"           ~ #{c.target_id} {c.target_title!r}")

    # Simulate the review loop. Posts 1~2 and 4~5 really do ask the same
    # thing; anything else above the fence is noise and gets an N. Precision
    # comes from the same code path the review server and evaluate CLI share.
    truly_related = {(1, 2), (4, 5)}
    judgments = [
        Judgment(
            c.master_id,
            c.target_id,
            "R" if (c.master_id, c.target_id) in truly_related else "N",
            evaluator="demo",
        )
        for c in report.candidates
    ]
    pairs = [(c.master_id, c.target_id) for c in report.candidates]
    metrics = metrics_document(pairs, judgments)
    print(f"\nafter human judgment: precision {metrics['precision_display']} "
          f"({metrics['true_positives']} of {metrics['total_candidates']} truly related)")
    print(f"\nreport written to {config.out_path}")
    print("to review interactively:")
    print(f"  doppel serve --report {config.out_path} --judgments {workdir}/judgments.csv --port 8080")


if __name__ == "__main__":
    main()
