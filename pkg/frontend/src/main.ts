/** Browser entry point: wires the triage session to the DOM. */

import { ReviewApi } from './api.js';
import type { Label } from './api.js';
import { formatSimilarity, metricsPanelText, progressRatio, progressText } from './format.js';
import { actionForKey } from './keyboard.js';
import { TriageSession } from './state.js';
import type { KeyValueStore } from './state.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const localStore: KeyValueStore = {
  get: (key) => window.localStorage.getItem(key),
  set: (key, value) => window.localStorage.setItem(key, value),
  remove: (key) => window.localStorage.removeItem(key),
};

function resolveEvaluator(): string {
  const saved = window.localStorage.getItem('doppel-evaluator');
  if (saved) return saved;
  const name = (window.prompt('Evaluator name for your judgments:') || 'anonymous').trim();
  window.localStorage.setItem('doppel-evaluator', name || 'anonymous');
  return name || 'anonymous';
}

function render(session: TriageSession): void {
  const { judged, total } = session.progress();
  el('progress-text').textContent = progressText(judged, total);
  el<HTMLElement>('progress-fill').style.width = `${progressRatio(judged, total) * 100}%`;
  el('metrics-value').textContent = metricsPanelText(session.metrics);
  el('metrics-detail').textContent = session.metrics
    ? `${session.metrics.true_positives} true positive(s) of ${session.metrics.total_candidates}, ` +
      `${session.metrics.unjudged} unjudged`
    : '';

  const banner = el('retry-banner');
  banner.hidden = session.retryPending === null;
  if (session.retryPending) {
    el('retry-message').textContent =
      `Submit failed (${session.retryPending.message}). Your label and comment are kept.`;
  }

  const card = session.current();
  const empty = el('empty-state');
  const cardNode = el('card');
  if (!card) {
    cardNode.hidden = true;
    empty.hidden = false;
    return;
  }
  cardNode.hidden = false;
  empty.hidden = session.candidates.length > 0;

  el('position').textContent = `${session.cursor + 1} of ${session.candidates.length}`;
  el('similarity').textContent = formatSimilarity(card.value);
  el('master-title').textContent = card.master_title;
  el('target-title').textContent = card.target_title;
  const masterLink = el<HTMLAnchorElement>('master-link');
  const targetLink = el<HTMLAnchorElement>('target-link');
  masterLink.href = card.master_url ?? '#';
  masterLink.textContent = `#${card.master_id}`;
  targetLink.href = card.target_url ?? '#';
  targetLink.textContent = `#${card.target_id}`;

  const mine = card.labels[session.evaluator];
  for (const label of ['D', 'R', 'N'] as const) {
    el(`btn-${label.toLowerCase()}`).classList.toggle('active', mine === label);
  }
  el('current-label').textContent = mine ? `your label: ${mine}` : 'not judged by you yet';
  const others = Object.entries(card.labels).filter(([who]) => who !== session.evaluator);
  el('other-labels').textContent = others.length
    ? 'others: ' + others.map(([who, what]) => `${who}=${what}`).join(', ')
    : '';

  const commentBox = el<HTMLTextAreaElement>('comment');
  if (commentBox.value !== session.comment()) commentBox.value = session.comment();

  el('done-note').hidden = !session.done();
}

async function boot(): Promise<void> {
  const api = new ReviewApi('');
  const session = new TriageSession(resolveEvaluator(), api, localStore);
  el('evaluator-name').textContent = session.evaluator;

  const rerender = () => render(session);

  const submit = async (label: Label) => {
    await session.label(label);
    rerender();
  };

  el('btn-d').addEventListener('click', () => void submit('D'));
  el('btn-r').addEventListener('click', () => void submit('R'));
  el('btn-n').addEventListener('click', () => void submit('N'));
  el('btn-skip').addEventListener('click', () => {
    session.skip();
    rerender();
  });
  el('btn-prev').addEventListener('click', () => {
    session.back();
    rerender();
  });
  el('btn-retry').addEventListener('click', () => void session.retry().then(rerender));
  el<HTMLInputElement>('unjudged-toggle').addEventListener('change', () =>
    void session.toggleUnjudgedOnly().then(rerender),
  );
  el<HTMLTextAreaElement>('comment').addEventListener('input', (event) => {
    session.setComment((event.target as HTMLTextAreaElement).value);
  });

  document.addEventListener('keydown', (event) => {
    const action = actionForKey({
      key: event.key,
      metaKey: event.metaKey,
      ctrlKey: event.ctrlKey,
      altKey: event.altKey,
      targetTag: (event.target as HTMLElement | null)?.tagName,
    });
    if (!action) return;
    event.preventDefault();
    if (action.kind === 'label') void submit(action.label);
    else if (action.kind === 'skip') {
      session.skip();
      rerender();
    } else if (action.kind === 'next') {
      session.advance();
      rerender();
    } else {
      session.back();
      rerender();
    }
  });

  try {
    await session.load();
    session.lastError = null;
  } catch (error) {
    session.lastError = String(error);
    el('retry-banner').hidden = false;
    el('retry-message').textContent = `Cannot reach the review server: ${String(error)}`;
  }
  rerender();
}

void boot();
