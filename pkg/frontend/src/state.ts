/**
 * Triage session: the pure state machine behind the UI.
 *
 * Holds the candidate deck (server-ordered by similarity descending), the
 * cursor, per-pair comment drafts, and the latest server metrics. Submits
 * are optimistic in flow but pessimistic in state: a card only shows a
 * label the server has acknowledged, and a failed submit parks the attempt
 * in a retry slot without losing the draft.
 */

import type { Candidate, Label, Metrics, ReviewApi } from './api.js';
import { ApiError } from './api.js';

export interface KeyValueStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();
  get(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }
  set(key: string, value: string): void {
    this.data.set(key, value);
  }
  remove(key: string): void {
    this.data.delete(key);
  }
}

export interface PendingRetry {
  pair: [number, number];
  label: Label;
  comment: string;
  message: string;
}

export function pairKey(masterId: number, targetId: number): string {
  return `${masterId}:${targetId}`;
}

export class TriageSession {
  candidates: Candidate[] = [];
  cursor = 0;
  metrics: Metrics | null = null;
  unjudgedOnly = false;
  retryPending: PendingRetry | null = null;
  lastError: string | null = null;

  private drafts = new Map<string, string>();

  constructor(
    readonly evaluator: string,
    private readonly api: ReviewApi,
    private readonly storage: KeyValueStore = new MemoryStore(),
  ) {}

  /** Fetch the full deck (all pages) and the current metrics. */
  async load(): Promise<void> {
    const items: Candidate[] = [];
    let page = 1;
    for (;;) {
      const block = await this.api.getCandidates({
        page,
        pageSize: 100,
        unjudgedOnly: this.unjudgedOnly,
        evaluator: this.unjudgedOnly ? this.evaluator : undefined,
      });
      items.push(...block.items);
      if (items.length >= block.total || block.items.length === 0) break;
      page += 1;
    }
    this.candidates = items;
    this.cursor = Math.min(this.cursor, Math.max(0, items.length - 1));
    this.hydrateDrafts();
    await this.refreshMetrics();
  }

  async refreshMetrics(): Promise<void> {
    this.metrics = await this.api.getMetrics();
  }

  current(): Candidate | null {
    return this.candidates[this.cursor] ?? null;
  }

  /** The current card's acknowledged label for this evaluator, if any. */
  currentLabel(): string | null {
    const card = this.current();
    if (!card) return null;
    return card.labels[this.evaluator] ?? null;
  }

  comment(): string {
    const card = this.current();
    if (!card) return '';
    return this.drafts.get(pairKey(card.master_id, card.target_id)) ?? '';
  }

  setComment(text: string): void {
    const card = this.current();
    if (!card) return;
    const key = pairKey(card.master_id, card.target_id);
    this.drafts.set(key, text);
    this.storage.set(this.draftStorageKey(key), text);
  }

  /** Submit a label for the current card; advances on acknowledgment. */
  async label(label: Label): Promise<boolean> {
    const card = this.current();
    if (!card) return false;
    return this.submit([card.master_id, card.target_id], label, this.comment());
  }

  /** Re-send the parked submission after a failure. */
  async retry(): Promise<boolean> {
    const pending = this.retryPending;
    if (!pending) return false;
    return this.submit(pending.pair, pending.label, pending.comment);
  }

  private async submit(
    pair: [number, number],
    label: Label,
    comment: string,
  ): Promise<boolean> {
    try {
      const response = await this.api.postJudgment({
        master_id: pair[0],
        target_id: pair[1],
        label,
        evaluator: this.evaluator,
        comment,
      });
      this.metrics = response.metrics;
      this.acknowledge(pair, label);
      this.retryPending = null;
      this.lastError = null;
      this.advance();
      return true;
    } catch (error) {
      // Non-destructive failure: the draft stays, the attempt is parked.
      const message = error instanceof ApiError ? error.message : String(error);
      this.retryPending = { pair, label, comment, message };
      this.lastError = message;
      return false;
    }
  }

  private acknowledge(pair: [number, number], label: Label): void {
    const key = pairKey(pair[0], pair[1]);
    for (const card of this.candidates) {
      if (pairKey(card.master_id, card.target_id) === key) {
        card.labels = { ...card.labels, [this.evaluator]: label };
        card.judged = true;
      }
    }
    this.drafts.delete(key);
    this.storage.remove(this.draftStorageKey(key));
  }

  skip(): void {
    this.advance();
  }

  advance(): void {
    if (this.cursor < this.candidates.length - 1) this.cursor += 1;
  }

  back(): void {
    if (this.cursor > 0) this.cursor -= 1;
  }

  async toggleUnjudgedOnly(): Promise<void> {
    this.unjudgedOnly = !this.unjudgedOnly;
    this.cursor = 0;
    await this.load();
  }

  /** judged/total over the loaded deck, from server-acknowledged labels. */
  progress(): { judged: number; total: number } {
    const judged = this.candidates.filter(
      (card) => card.labels[this.evaluator] !== undefined,
    ).length;
    return { judged, total: this.candidates.length };
  }

  done(): boolean {
    const { judged, total } = this.progress();
    return total > 0 && judged === total;
  }

  private draftStorageKey(key: string): string {
    return `doppel-draft:${this.evaluator}:${key}`;
  }

  private hydrateDrafts(): void {
    for (const card of this.candidates) {
      const key = pairKey(card.master_id, card.target_id);
      if (!this.drafts.has(key)) {
        const saved = this.storage.get(this.draftStorageKey(key));
        if (saved !== null) this.drafts.set(key, saved);
      }
    }
  }
}
