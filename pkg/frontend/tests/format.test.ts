import { describe, expect, it } from 'vitest';

import type { Metrics } from '../src/api.js';
import { formatSimilarity, metricsPanelText, progressRatio, progressText } from '../src/format.js';

function metrics(overrides: Partial<Metrics> = {}): Metrics {
  return {
    format: 'doppel-metrics/1',
    denominator: 'all_candidates',
    total_candidates: 4,
    judged: 4,
    unjudged: 0,
    true_positives: 3,
    precision: 0.75,
    precision_display: '75.00%',
    undefined: false,
    label_counts: { D: 1, R: 2, N: 1 },
  };
}

describe('formatSimilarity', () => {
  it('always shows four decimals, matching the report tables', () => {
    expect(formatSimilarity(0.8528)).toBe('0.8528');
    expect(formatSimilarity(0.897)).toBe('0.8970');
    expect(formatSimilarity(1)).toBe('1.0000');
  });
});

describe('metricsPanelText', () => {
  it('passes the server display string through untouched', () => {
    expect(metricsPanelText(metrics())).toBe('75.00%');
  });

  it('shows n/a for the explicit undefined marker', () => {
    const m = { ...metrics(), undefined: true, precision: null, precision_display: null };
    expect(metricsPanelText(m)).toBe('n/a');
  });

  it('shows an ellipsis before metrics arrive', () => {
    expect(metricsPanelText(null)).toBe('…');
  });
});

describe('progress', () => {
  it('renders judged/total', () => {
    expect(progressText(2, 4)).toBe('2/4');
  });

  it('ratio is safe on empty decks', () => {
    expect(progressRatio(0, 0)).toBe(0);
    expect(progressRatio(3, 4)).toBe(0.75);
  });
});
