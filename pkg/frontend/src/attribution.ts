// Attribution views: signed group bars (waterfall analogue), a montage
// heatmap overlay, and per-token colored text. Every number rendered here
// comes from a service explain payload; nothing is computed locally
// beyond display rounding.

import type { ExplainResponse, HeatmapPayload, TokenAttribution } from './types';

export const DISPLAY_DECIMALS = 2;

export function roundForDisplay(value: number): number {
  const k = 10 ** DISPLAY_DECIMALS;
  return Math.round(value * k) / k;
}

export function renderGroupBars(payload: ExplainResponse, container: HTMLElement): void {
  container.textContent = '';
  const caption = document.createElement('p');
  caption.className = 'bars-caption';
  caption.textContent =
    `prediction ${roundForDisplay(payload.prediction)} = expected ${roundForDisplay(payload.expected_value)}` +
    ' + attribution bars below';
  container.append(caption);

  const maxAbs = Math.max(1e-9, ...payload.groups.map((g) => Math.abs(g.signed)));
  for (const group of payload.groups) {
    const row = document.createElement('div');
    row.className = 'bar-row';
    row.dataset.group = group.name;
    row.dataset.modality = group.modality;
    row.dataset.signed = String(group.signed);

    const label = document.createElement('span');
    label.className = 'bar-label';
    label.textContent = `${group.name} (${group.modality})`;

    const bar = document.createElement('span');
    bar.className = `bar ${group.signed >= 0 ? 'bar-positive' : 'bar-negative'}`;
    bar.style.width = `${(Math.abs(group.signed) / maxAbs) * 100}%`;

    const value = document.createElement('span');
    value.className = 'bar-value';
    value.textContent = roundForDisplay(group.signed).toFixed(DISPLAY_DECIMALS);

    row.append(label, bar, value);
    container.append(row);
  }
}

function heatColor(value: number, maxAbs: number): string {
  const strength = Math.min(1, Math.abs(value) / (maxAbs || 1));
  const alpha = (0.15 + 0.85 * strength).toFixed(3);
  return value >= 0 ? `rgba(220, 60, 50, ${alpha})` : `rgba(40, 90, 220, ${alpha})`;
}

export function renderHeatmap(heatmap: HeatmapPayload, container: HTMLElement): void {
  container.textContent = '';
  const grid = document.createElement('div');
  grid.className = 'heatmap';
  grid.style.display = 'grid';
  grid.style.gridTemplateColumns = `repeat(${heatmap.cols}, 1fr)`;
  const maxAbs = Math.max(...heatmap.values.flat().map(Math.abs), 1e-12);
  heatmap.values.forEach((row, r) => {
    row.forEach((value, c) => {
      const cell = document.createElement('span');
      cell.className = 'heatmap-cell';
      cell.dataset.row = String(r);
      cell.dataset.col = String(c);
      cell.dataset.phi = String(value);
      cell.style.background = heatColor(value, maxAbs);
      grid.append(cell);
    });
  });
  container.append(grid);
}

export function renderColoredTokens(tokens: TokenAttribution[], container: HTMLElement): void {
  container.textContent = '';
  const maxAbs = Math.max(...tokens.map((t) => Math.abs(t.phi)), 1e-12);
  for (const token of tokens) {
    const span = document.createElement('span');
    span.className = 'token';
    span.dataset.segment = token.segment;
    span.dataset.phi = String(token.phi);
    span.textContent = token.token;
    span.style.background = heatColor(token.phi, maxAbs);
    span.title = `${token.segment}: ${token.phi.toExponential(3)}`;
    container.append(span, document.createTextNode(' '));
  }
}
