// What-if session state: a baseline vehicle, the edited working copy, and
// an append-only history of prediction cycles.

import type { ExplainResponse, FeatureMap, PredictResponse, SchemaPayload } from './types';

export interface HistoryEntry {
  edit: FeatureMap; // the delta applied in this cycle
  scores: Record<string, number>; // raw score per rating name
  explain?: ExplainResponse;
  at: number;
}

export class Session {
  readonly baseline: FeatureMap;
  working: FeatureMap;
  baselineScores: Record<string, number> | null = null;
  currentScores: Record<string, number> | null = null;
  private readonly entries: HistoryEntry[] = [];

  constructor(baseline: FeatureMap) {
    this.baseline = { ...baseline };
    this.working = { ...baseline };
  }

  /** Blank session from schema defaults: numeric midpoints, first category value. */
  static blank(schema: SchemaPayload): Session {
    const baseline: FeatureMap = {};
    for (const f of schema.features) {
      if (f.kind === 'numeric') {
        baseline[f.name] = ((f.numeric_min ?? 0) + (f.numeric_max ?? 1)) / 2;
      } else {
        baseline[f.name] = (f.vocabulary ?? [''])[0];
      }
    }
    return new Session(baseline);
  }

  applyEdit(edit: FeatureMap): void {
    this.working = { ...this.working, ...edit };
  }

  revertFeature(name: string): void {
    this.working[name] = this.baseline[name];
  }

  recordCycle(edit: FeatureMap, response: PredictResponse, explain?: ExplainResponse): HistoryEntry {
    const scores: Record<string, number> = {};
    for (const [score, pred] of Object.entries(response.predictions)) scores[score] = pred.raw;
    if (this.baselineScores === null) this.baselineScores = scores;
    this.currentScores = scores;
    const entry: HistoryEntry = { edit: { ...edit }, scores, explain, at: Date.now() };
    this.entries.push(entry);
    return entry;
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  editedFeatures(): string[] {
    return Object.keys(this.working).filter((k) => this.working[k] !== this.baseline[k]);
  }

  deltas(): Record<string, number> | null {
    if (!this.baselineScores || !this.currentScores) return null;
    const out: Record<string, number> = {};
    for (const score of Object.keys(this.currentScores)) {
      out[score] = this.currentScores[score] - (this.baselineScores[score] ?? 0);
    }
    return out;
  }
}
