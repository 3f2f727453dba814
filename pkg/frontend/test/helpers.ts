// Test harness: a fetch mock serving recorded service fixtures. The mock
// only replays responses captured from the real service; any request it
// does not recognize fails the test, so every number the UI displays is
// traceable to a recorded service response.

import fixtureJson from './fixtures/demo_bundle.json';
import type { ExplainResponse, FeatureMap, PredictResponse, SchemaPayload } from '../src/types';

export interface Fixture {
  planted_direction: { feature: string; weight: number };
  schema: SchemaPayload;
  bundles: { api_version: string; bundles: unknown[] };
  baseline: { request: { parametric: FeatureMap }; response: PredictResponse };
  edited: { request: { parametric: FeatureMap }; response: PredictResponse };
  explain: { request: { parametric: FeatureMap; score: string }; response: ExplainResponse };
}

export function loadFixture(): Fixture {
  // deep-copy so tests mutating responses (sentinel checks) stay isolated
  return JSON.parse(JSON.stringify(fixtureJson)) as Fixture;
}

function sameValue(a: number | string, b: number | string): boolean {
  const na = Number(a);
  const nb = Number(b);
  if (!Number.isNaN(na) && !Number.isNaN(nb)) return Math.abs(na - nb) < 1e-9;
  return String(a) === String(b);
}

export function sameParametric(a: FeatureMap, b: FeatureMap): boolean {
  const keys = new Set([...Object.keys(a), ...Object.keys(b)]);
  for (const key of keys) {
    if (!(key in a) || !(key in b) || !sameValue(a[key], b[key])) return false;
  }
  return true;
}

export interface RequestLogEntry {
  path: string;
  body: { parametric?: FeatureMap; score?: string } | null;
}

export interface FetchMock {
  log: RequestLogEntry[];
  /** Override the response for the edited-request match (sentinel tests). */
  editedResponse: PredictResponse;
}

export function installFetchMock(fixture: Fixture): FetchMock {
  const mock: FetchMock = {
    log: [],
    editedResponse: fixture.edited.response,
  };

  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const path = String(input);
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    mock.log.push({ path, body });

    const json = (payload: unknown) =>
      new Response(JSON.stringify(payload), { status: 200, headers: { 'content-type': 'application/json' } });

    if (path.endsWith('/schema')) return json(fixture.schema);
    if (path.endsWith('/bundles')) return json(fixture.bundles);
    if (path.endsWith('/predict')) {
      if (sameParametric(body.parametric, fixture.baseline.request.parametric)) {
        return json(fixture.baseline.response);
      }
      if (sameParametric(body.parametric, fixture.edited.request.parametric)) {
        return json(mock.editedResponse);
      }
      throw new Error(`fetch mock: unrecognized predict body for ${path}`);
    }
    if (path.endsWith('/explain')) {
      if (sameParametric(body.parametric, fixture.explain.request.parametric)) {
        return json(fixture.explain.response);
      }
      throw new Error('fetch mock: unrecognized explain body');
    }
    throw new Error(`fetch mock: unrecognized path ${path}`);
  }) as typeof fetch;

  return mock;
}

export function mountDom(): void {
  document.body.innerHTML = `
    <div id="spec-form"></div>
    <p id="status"></p>
    <div id="scores"></div>
    <div id="bars"></div>
    <div id="heatmap"></div>
    <p id="tokens"></p>
    <div id="compare"></div>
  `;
}

export function el(id: string): HTMLElement {
  return document.getElementById(id)!;
}

export async function flushAsync(): Promise<void> {
  // interleave macrotasks so zero-delay debounce timers fire
  for (let i = 0; i < 5; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
