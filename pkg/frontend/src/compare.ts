// Baseline-versus-working comparison: five scores with deltas, exportable
// as JSON and reproducible from an export.

import { roundForDisplay } from './attribution';
import { Session } from './session';

export interface ComparisonExport {
  baseline: Record<string, number>;
  current: Record<string, number>;
  deltas: Record<string, number>;
  edited_features: Record<string, { baseline: number | string; current: number | string }>;
}

export function buildComparison(session: Session): ComparisonExport {
  if (!session.baselineScores || !session.currentScores) {
    throw new Error('comparison needs at least one completed prediction cycle');
  }
  const edited: ComparisonExport['edited_features'] = {};
  for (const name of session.editedFeatures()) {
    edited[name] = { baseline: session.baseline[name], current: session.working[name] };
  }
  return {
    baseline: { ...session.baselineScores },
    current: { ...session.currentScores },
    deltas: session.deltas() ?? {},
    edited_features: edited,
  };
}

export function exportComparison(session: Session): string {
  return JSON.stringify(buildComparison(session), null, 1);
}

export function importComparison(text: string): ComparisonExport {
  const data = JSON.parse(text) as ComparisonExport;
  if (!data.baseline || !data.current || !data.deltas) {
    throw new Error('not a comparison export');
  }
  return data;
}

export function renderComparison(comparison: ComparisonExport, container: HTMLElement): void {
  container.textContent = '';
  const table = document.createElement('table');
  table.className = 'compare-table';
  const head = table.createTHead().insertRow();
  for (const title of ['score', 'baseline', 'current', 'delta']) {
    const cell = document.createElement('th');
    cell.textContent = title;
    head.append(cell);
  }
  const body = table.createTBody();
  for (const score of Object.keys(comparison.baseline)) {
    const row = body.insertRow();
    row.dataset.score = score;
    row.insertCell().textContent = score;
    row.insertCell().textContent = roundForDisplay(comparison.baseline[score]).toFixed(2);
    row.insertCell().textContent = roundForDisplay(comparison.current[score]).toFixed(2);
    const delta = row.insertCell();
    delta.dataset.delta = String(comparison.deltas[score]);
    delta.textContent = roundForDisplay(comparison.deltas[score]).toFixed(2);
  }
  container.append(table);
}
