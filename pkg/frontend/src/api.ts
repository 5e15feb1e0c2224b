/** Thin fetch client for the engine's HTTP API. */

import type {
  AgentTypeInfo,
  AggregateSeriesDoc,
  ChoroplethFrameDoc,
  ComparisonTableDoc,
  Diagnostic,
  JobStatusDoc,
  ScenarioDoc,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public diagnostics: Diagnostic[] = [],
  ) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? resp.statusText, body.diagnostics ?? []);
  }
  return body as T;
}

export class ApiClient {
  constructor(private base = '') {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  agentTypes(): Promise<AgentTypeInfo[]> {
    return fetch(this.url('/api/agent-types')).then((r) => asJson(r));
  }

  geo(): Promise<GeoJSON> {
    return fetch(this.url('/api/geo')).then((r) => asJson(r));
  }

  listScenarios(): Promise<{ id: string; name: string; description: string }[]> {
    return fetch(this.url('/api/scenarios')).then((r) => asJson(r));
  }

  createScenario(doc: ScenarioDoc): Promise<{ id: string }> {
    return fetch(this.url('/api/scenarios'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(doc),
    }).then((r) => asJson(r));
  }

  readScenario(id: string): Promise<ScenarioDoc & { id: string }> {
    return fetch(this.url(`/api/scenarios/${id}`)).then((r) => asJson(r));
  }

  updateScenario(id: string, doc: ScenarioDoc): Promise<{ id: string }> {
    return fetch(this.url(`/api/scenarios/${id}`), {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(doc),
    }).then((r) => asJson(r));
  }

  deleteScenario(id: string): Promise<{ deleted: string }> {
    return fetch(this.url(`/api/scenarios/${id}`), { method: 'DELETE' }).then((r) => asJson(r));
  }

  /** Returns [] when valid, the diagnostics list otherwise. */
  async validateScenario(id: string): Promise<Diagnostic[]> {
    const resp = await fetch(this.url(`/api/scenarios/${id}/validate`), { method: 'POST' });
    const body = await resp.json();
    if (resp.status === 422) return body.diagnostics as Diagnostic[];
    if (!resp.ok) throw new ApiError(resp.status, body.error ?? resp.statusText);
    return [];
  }

  uploadFlow(agentType: string, xml: string): Promise<{ fingerprint: string; diagnostics: Diagnostic[] }> {
    return fetch(this.url(`/api/flows?agent_type=${encodeURIComponent(agentType)}`), {
      method: 'POST',
      headers: { 'content-type': 'application/xml' },
      body: xml,
    }).then((r) => asJson(r));
  }

  rawFlow(agentType: string): Promise<string> {
    return fetch(this.url(`/api/flows/raw?agent_type=${encodeURIComponent(agentType)}`)).then((r) => {
      if (!r.ok) throw new ApiError(r.status, r.statusText);
      return r.text();
    });
  }

  compare(ids: string[]): Promise<ComparisonTableDoc> {
    return fetch(this.url(`/api/compare?ids=${ids.map(encodeURIComponent).join(',')}`)).then((r) =>
      asJson(r),
    );
  }

  submitRuns(
    scenarioIds: string[],
    settings: { duration_steps: number; iterations_per_scenario: number; collection_interval: number },
    baseSeed: number,
  ): Promise<{ job_id: string }> {
    return fetch(this.url('/api/runs'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ scenario_ids: scenarioIds, settings, base_seed: baseSeed }),
    }).then((r) => asJson(r));
  }

  jobStatus(jobId: string): Promise<JobStatusDoc> {
    return fetch(this.url(`/api/runs/${jobId}/status`)).then((r) => asJson(r));
  }

  results(jobId: string, scenario: string, reporter: string): Promise<AggregateSeriesDoc> {
    const q = `scenario=${encodeURIComponent(scenario)}&reporter=${encodeURIComponent(reporter)}`;
    return fetch(this.url(`/api/runs/${jobId}/results?${q}`)).then((r) => asJson(r));
  }

  choropleth(jobId: string, reporter: string, tick: number, scenario = ''): Promise<ChoroplethFrameDoc> {
    const q =
      `reporter=${encodeURIComponent(reporter)}&tick=${tick}` +
      (scenario ? `&scenario=${encodeURIComponent(scenario)}` : '');
    return fetch(this.url(`/api/runs/${jobId}/choropleth?${q}`)).then((r) => asJson(r));
  }
}

export interface GeoJSON {
  type: 'FeatureCollection';
  features: {
    type: 'Feature';
    properties: { region_id: string } & Record<string, unknown>;
    geometry: { type: 'Polygon'; coordinates: number[][][] };
  }[];
}
