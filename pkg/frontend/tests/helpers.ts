/**
 * In-memory stand-in for the review server, mirroring its semantics:
 * append-only judgment log, latest-per-evaluator superseding, strict
 * majority of D/R as true positive, all_candidates denominator, and
 * truncated two-decimal percentage display.
 */

import type { Candidate, Metrics } from '../src/api.js';

interface StoredJudgment {
  master_id: number;
  target_id: number;
  label: string;
  evaluator: string;
  comment: string;
  seq: number;
}

export function makeCandidate(
  masterId: number,
  targetId: number,
  value: number,
  overrides: Partial<Candidate> = {},
): Candidate {
  return {
    master_id: masterId,
    target_id: targetId,
    value,
    value_display: value.toFixed(4),
    master_title: `master ${masterId}`,
    target_title: `target ${targetId}`,
    master_url: `https://forum.example/${masterId}`,
    target_url: `https://forum.example/${targetId}`,
    labels: {},
    judged: false,
    ...overrides,
  };
}

function truncatedPercent(value: number): string {
  return (Math.floor(value * 10000 + 1e-6) / 100).toFixed(2) + '%';
}

export class FakeServer {
  judgments: StoredJudgment[] = [];
  failNextPosts = 0;
  requests: string[] = [];

  constructor(private readonly candidates: Candidate[]) {}

  private effectiveLabels(): Map<string, Map<string, string>> {
    const byPair = new Map<string, Map<string, string>>();
    for (const j of this.judgments) {
      const key = `${j.master_id}:${j.target_id}`;
      if (!byPair.has(key)) byPair.set(key, new Map());
      byPair.get(key)!.set(j.evaluator, j.label); // later entries supersede
    }
    return byPair;
  }

  metrics(): Metrics {
    const byPair = this.effectiveLabels();
    let truePositives = 0;
    const counts: Record<string, number> = { D: 0, R: 0, N: 0 };
    for (const labels of byPair.values()) {
      const values = [...labels.values()];
      const related = values.filter((v) => v === 'D' || v === 'R').length;
      if (related * 2 > values.length) {
        truePositives += 1;
        const d = values.filter((v) => v === 'D').length;
        const r = values.filter((v) => v === 'R').length;
        counts[d > r ? 'D' : 'R'] += 1;
      } else {
        counts['N'] += 1;
      }
    }
    const total = this.candidates.length;
    const precision = truePositives / total;
    return {
      format: 'doppel-metrics/1',
      denominator: 'all_candidates',
      total_candidates: total,
      judged: byPair.size,
      unjudged: total - byPair.size,
      true_positives: truePositives,
      precision,
      precision_display: truncatedPercent(precision),
      undefined: false,
      label_counts: counts,
    };
  }

  private candidateView(): Candidate[] {
    const byPair = this.effectiveLabels();
    return this.candidates.map((c) => {
      const labels = byPair.get(`${c.master_id}:${c.target_id}`);
      return {
        ...c,
        labels: labels ? Object.fromEntries(labels) : {},
        judged: Boolean(labels && labels.size),
      };
    });
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    this.requests.push(input);
    const url = new URL(input, 'http://fake');
    if (url.pathname === '/api/v1/candidates') {
      let items = this.candidateView();
      if (url.searchParams.get('unjudged_only') === 'true') {
        const evaluator = url.searchParams.get('evaluator');
        items = items.filter((c) =>
          evaluator ? c.labels[evaluator] === undefined : !c.judged,
        );
      }
      const page = Number(url.searchParams.get('page') ?? '1');
      const pageSize = Number(url.searchParams.get('page_size') ?? '20');
      const start = (page - 1) * pageSize;
      return json(200, {
        page,
        page_size: pageSize,
        total: items.length,
        items: items.slice(start, start + pageSize),
      });
    }
    if (url.pathname === '/api/v1/judgments' && init?.method === 'POST') {
      if (this.failNextPosts > 0) {
        this.failNextPosts -= 1;
        return json(503, { detail: 'committer offline' });
      }
      const body = JSON.parse(String(init.body));
      const known = this.candidates.some(
        (c) => c.master_id === body.master_id && c.target_id === body.target_id,
      );
      if (!known) return json(404, { detail: 'unknown pair' });
      if (!['D', 'R', 'N'].includes(body.label)) {
        return json(422, { detail: 'bad label' });
      }
      this.judgments.push({ ...body, seq: this.judgments.length });
      return json(200, { ok: true, metrics: this.metrics() });
    }
    if (url.pathname === '/api/v1/metrics') {
      return json(200, this.metrics());
    }
    return json(404, { detail: `no route for ${url.pathname}` });
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}
