// Page bootstrap: fetch the schema, build the form, wire the what-if loop.

import { ApiClient } from './api';
import { renderComparison, buildComparison, exportComparison } from './compare';
import { renderSpecForm } from './form';
import { Session } from './session';
import { WhatIfController } from './whatif';

const SERVICE_BASE_URL = (globalThis as { SERVICE_BASE_URL?: string }).SERVICE_BASE_URL ?? '';
const BUNDLE = (globalThis as { BUNDLE_NAME?: string }).BUNDLE_NAME ?? 'demo';

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found;
}

export async function bootstrap(): Promise<WhatIfController> {
  const api = new ApiClient(SERVICE_BASE_URL);
  const status = el('status');

  let schema;
  for (;;) {
    try {
      schema = await api.schema();
      break;
    } catch (err) {
      status.textContent = `schema fetch failed (${(err as Error).message}); retrying...`;
      await new Promise((resolve) => setTimeout(resolve, 2000));
    }
  }

  const session = Session.blank(schema);
  const controller = new WhatIfController(api, session, {
    scores: el('scores'),
    bars: el('bars'),
    heatmap: el('heatmap'),
    tokens: el('tokens'),
    status,
  }, BUNDLE);

  renderSpecForm(schema, session.working, el('spec-form'), (edit) => controller.onEdit(edit));

  el('explain-button').addEventListener('click', () => {
    const score = (el('score-select') as HTMLSelectElement).value;
    void controller.explain(score);
  });
  const scoreSelect = el('score-select') as HTMLSelectElement;
  for (const score of schema.scores) {
    const option = document.createElement('option');
    option.value = score;
    option.textContent = score;
    scoreSelect.append(option);
  }

  el('compare-button').addEventListener('click', () => {
    renderComparison(buildComparison(session), el('compare'));
  });
  el('export-button').addEventListener('click', () => {
    const blob = new Blob([exportComparison(session)], { type: 'application/json' });
    const link = document.createElement('a');
    link.href = URL.createObjectURL(blob);
    link.download = 'comparison.json';
    link.click();
  });

  // initial prediction for the blank baseline
  controller.onEdit({});
  return controller;
}

if (typeof document !== 'undefined' && document.getElementById('spec-form')) {
  void bootstrap();
}
