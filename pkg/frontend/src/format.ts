import type { Metrics } from './api.js';

/** Similarity values display with exactly four decimals, table-style. */
export function formatSimilarity(value: number): string {
  return value.toFixed(4);
}

/**
 * The metrics panel text. Always the server-provided display string; an
 * undefined precision (nothing judged yet under judged_only) shows as n/a.
 */
export function metricsPanelText(metrics: Metrics | null): string {
  if (metrics === null) return '…';
  if (metrics.undefined || metrics.precision_display === null) return 'n/a';
  return metrics.precision_display;
}

export function progressText(judged: number, total: number): string {
  return `${judged}/${total}`;
}

export function progressRatio(judged: number, total: number): number {
  return total === 0 ? 0 : judged / total;
}
