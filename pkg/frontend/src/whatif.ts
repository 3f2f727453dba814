// The interactive loop: edits debounce into a predict call; explain runs
// on demand; each answer appends to the session history so the next edit
// is informed by the last result. Scores render only from service
// responses.

import { ApiClient } from './api';
import { renderGroupBars, renderHeatmap, renderColoredTokens, roundForDisplay } from './attribution';
import { Session } from './session';
import type { ExplainResponse, FeatureMap, PredictRequest } from './types';

export const DEBOUNCE_MS = 300;

export interface WhatIfElements {
  scores: HTMLElement;
  bars: HTMLElement;
  heatmap?: HTMLElement;
  tokens?: HTMLElement;
  status?: HTMLElement;
}

export class WhatIfController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pendingEdit: FeatureMap = {};
  lastExplain: ExplainResponse | null = null;

  constructor(
    readonly api: ApiClient,
    readonly session: Session,
    readonly elements: WhatIfElements,
    readonly bundle: string = 'demo',
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  /** Slider/dropdown edits funnel here; a trailing debounce fires predict. */
  onEdit(edit: FeatureMap): void {
    this.session.applyEdit(edit);
    this.pendingEdit = { ...this.pendingEdit, ...edit };
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.runCycle();
    }, this.debounceMs);
  }

  private request(): PredictRequest {
    return { bundle: this.bundle, parametric: { ...this.session.working } };
  }

  async runCycle(): Promise<void> {
    const edit = this.pendingEdit;
    this.pendingEdit = {};
    this.setStatus('predicting...');
    let response;
    try {
      response = await this.api.predict(this.request());
    } catch (err) {
      this.showError(err);
      return;
    }
    if (response === null) return; // superseded by a newer edit
    this.session.recordCycle(edit, response);
    this.renderScores();
    this.setStatus('');
  }

  async explain(score: string): Promise<ExplainResponse | null> {
    this.setStatus('explaining...');
    let payload: ExplainResponse;
    try {
      payload = await this.api.explain({ ...this.request(), score });
    } catch (err) {
      this.showError(err);
      return null;
    }
    this.lastExplain = payload;
    renderGroupBars(payload, this.elements.bars);
    if (this.elements.heatmap && payload.attributions.heatmap) {
      renderHeatmap(payload.attributions.heatmap, this.elements.heatmap);
    }
    if (this.elements.tokens && payload.attributions.tokens) {
      renderColoredTokens(payload.attributions.tokens, this.elements.tokens);
    }
    this.setStatus('');
    return payload;
  }

  renderScores(): void {
    const container = this.elements.scores;
    container.textContent = '';
    const scores = this.session.currentScores;
    if (!scores) return;
    const deltas = this.session.deltas() ?? {};
    for (const [score, raw] of Object.entries(scores)) {
      const row = document.createElement('div');
      row.className = 'score-row';
      row.dataset.score = score;
      row.dataset.raw = String(raw);

      const name = document.createElement('span');
      name.className = 'score-name';
      name.textContent = score;

      const value = document.createElement('span');
      value.className = 'score-value';
      value.textContent = roundForDisplay(raw).toFixed(2);

      const delta = document.createElement('span');
      const d = deltas[score] ?? 0;
      delta.className = `score-delta ${d > 0 ? 'up' : d < 0 ? 'down' : 'flat'}`;
      delta.dataset.delta = String(d);
      delta.textContent = `${d >= 0 ? '+' : ''}${roundForDisplay(d).toFixed(2)}`;

      row.append(name, value, delta);
      container.append(row);
    }
  }

  private setStatus(text: string): void {
    if (this.elements.status) this.elements.status.textContent = text;
  }

  private showError(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.setStatus(`error: ${message}`);
    const field = (err as { field?: string | null }).field;
    if (field) {
      const name = field.split('.').pop() ?? '';
      const control = document.querySelector<HTMLElement>(`[data-feature="${name}"]`);
      control?.classList.add('field-error');
    }
  }
}
