/**
 * Typed client for the review server's /api/v1 endpoints.
 *
 * The UI never derives metrics itself: every number shown on screen is a
 * value this client fetched from the server verbatim.
 */

export type Label = 'D' | 'R' | 'N';

export interface Candidate {
  master_id: number;
  target_id: number;
  value: number;
  value_display: string;
  master_title: string;
  target_title: string;
  master_url: string | null;
  target_url: string | null;
  labels: Record<string, string>;
  judged: boolean;
}

export interface CandidatePage {
  page: number;
  page_size: number;
  total: number;
  items: Candidate[];
}

export interface Metrics {
  format: string;
  denominator: string;
  total_candidates: number;
  judged: number;
  unjudged: number;
  true_positives: number;
  precision: number | null;
  precision_display: string | null;
  undefined: boolean;
  label_counts: Record<string, number>;
}

export interface ReportMeta {
  format: string;
  tool_version: string;
  created_at: string;
  total_candidates: number;
  denominator: string;
  threshold_stats: { k: number; size_s: number; t_related: number };
  config: { project: string | null; category: string | null; k: number };
}

export interface JudgmentSubmission {
  master_id: number;
  target_id: number;
  label: Label;
  evaluator: string;
  comment: string;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface CandidateQuery {
  page?: number;
  pageSize?: number;
  unjudgedOnly?: boolean;
  evaluator?: string;
}

export class ReviewApi {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (error) {
      throw new ApiError(`server unreachable: ${String(error)}`);
    }
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body: keep the status line
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  getCandidates(query: CandidateQuery = {}): Promise<CandidatePage> {
    const params = new URLSearchParams();
    if (query.page !== undefined) params.set('page', String(query.page));
    if (query.pageSize !== undefined) params.set('page_size', String(query.pageSize));
    if (query.unjudgedOnly) params.set('unjudged_only', 'true');
    if (query.evaluator) params.set('evaluator', query.evaluator);
    const suffix = params.size ? `?${params.toString()}` : '';
    return this.request<CandidatePage>(`/api/v1/candidates${suffix}`);
  }

  postJudgment(judgment: JudgmentSubmission): Promise<{ ok: boolean; metrics: Metrics }> {
    return this.request(`/api/v1/judgments`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(judgment),
    });
  }

  getMetrics(denominator?: string): Promise<Metrics> {
    const suffix = denominator ? `?denominator=${encodeURIComponent(denominator)}` : '';
    return this.request<Metrics>(`/api/v1/metrics${suffix}`);
  }

  getMeta(): Promise<ReportMeta> {
    return this.request<ReportMeta>(`/api/v1/report/meta`);
  }
}
