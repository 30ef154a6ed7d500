/**
 * Keyboard-first labeling: evaluators work through hundreds of pairs, so
 * every decision is one keystroke. d / r / n submit that label for the
 * current card, space skips, arrows (or j / k) move without judging.
 */

import type { Label } from './api.js';

export type TriageAction =
  | { kind: 'label'; label: Label }
  | { kind: 'skip' }
  | { kind: 'next' }
  | { kind: 'prev' };

export interface KeyStroke {
  key: string;
  metaKey?: boolean;
  ctrlKey?: boolean;
  altKey?: boolean;
  targetTag?: string;
}

const LABEL_KEYS: Record<string, Label> = { d: 'D', r: 'R', n: 'N' };

export function actionForKey(stroke: KeyStroke): TriageAction | null {
  // Never steal keystrokes from the comment box or other form fields.
  const tag = (stroke.targetTag ?? '').toLowerCase();
  if (tag === 'input' || tag === 'textarea' || tag === 'select') return null;
  if (stroke.metaKey || stroke.ctrlKey || stroke.altKey) return null;

  const key = stroke.key.toLowerCase();
  const label = LABEL_KEYS[key];
  if (label) return { kind: 'label', label };
  if (key === ' ' || key === 'spacebar') return { kind: 'skip' };
  if (key === 'arrowright' || key === 'j') return { kind: 'next' };
  if (key === 'arrowleft' || key === 'k') return { kind: 'prev' };
  return null;
}
