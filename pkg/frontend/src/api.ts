// Thin typed client over the prediction service. At most one predict
// request is in flight per client; newer requests abort older ones
// (latest wins).

import type { ExplainResponse, PredictRequest, PredictResponse, SchemaPayload, BundleInfo } from './types';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field: string | null = null,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = await resp.json();
    return new ApiError(resp.status, body.error?.code ?? 'unknown', body.error?.message ?? resp.statusText, body.error?.field ?? null);
  } catch {
    return new ApiError(resp.status, 'unknown', resp.statusText);
  }
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(readonly baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async schema(): Promise<SchemaPayload> {
    const resp = await fetch(this.url('/schema'));
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async bundles(): Promise<BundleInfo[]> {
    const resp = await fetch(this.url('/bundles'));
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()).bundles;
  }

  /** Latest-wins: a newer call aborts the previous in-flight prediction. */
  async predict(request: PredictRequest): Promise<PredictResponse | null> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let resp: Response;
    try {
      resp = await fetch(this.url('/predict'), {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
    } catch (err) {
      if ((err as DOMException).name === 'AbortError') return null; // superseded
      throw err;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  async explain(request: PredictRequest & { score: string }): Promise<ExplainResponse> {
    const resp = await fetch(this.url('/explain'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    });
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }
}
