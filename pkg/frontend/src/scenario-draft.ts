/**
 * Scenario draft: client-side mirror of the scenario document plus dirty
 * flag and validation state. Submission is blocked while the draft fails
 * the local schema or has unresolved server diagnostics.
 */

import { scenarioSchema } from './schema.js';
import type { Diagnostic, PolicyDoc, ScenarioDoc } from './types.js';

export interface ScenarioDraft {
  doc: ScenarioDoc;
  dirty: boolean;
  serverDiagnostics: Diagnostic[];
}

export function newDraft(name: string): ScenarioDraft {
  return {
    doc: { name, description: '', parameters: {}, policies: [], flows: {} },
    dirty: true,
    serverDiagnostics: [],
  };
}

export function draftFromServer(doc: ScenarioDoc): ScenarioDraft {
  return { doc: structuredClone(doc), dirty: false, serverDiagnostics: [] };
}

export function touch(draft: ScenarioDraft, update: (doc: ScenarioDoc) => void): ScenarioDraft {
  const doc = structuredClone(draft.doc);
  update(doc);
  return { doc, dirty: true, serverDiagnostics: [] };
}

export function addPolicy(draft: ScenarioDraft, policy: PolicyDoc): ScenarioDraft {
  return touch(draft, (doc) => {
    doc.policies = [...doc.policies.filter((p) => p.name !== policy.name), policy];
  });
}

export function setFlow(draft: ScenarioDraft, agentType: string, graphml: string): ScenarioDraft {
  return touch(draft, (doc) => {
    doc.flows[agentType] = { inline: graphml };
  });
}

export function setParameter(draft: ScenarioDraft, name: string, value: unknown): ScenarioDraft {
  return touch(draft, (doc) => {
    doc.parameters[name] = value;
  });
}

export interface DraftCheck {
  ok: boolean;
  problems: string[];
}

/** Local schema check; the server's validate endpoint is the authority. */
export function checkDraft(draft: ScenarioDraft): DraftCheck {
  const parsed = scenarioSchema.safeParse(draft.doc);
  const problems = parsed.success
    ? []
    : parsed.error.issues.map((i) => `${i.path.join('.')}: ${i.message}`);
  for (const d of draft.serverDiagnostics) {
    problems.push(`${d.code}: ${d.message}`);
  }
  return { ok: problems.length === 0, problems };
}

export function submittable(draft: ScenarioDraft): boolean {
  return checkDraft(draft).ok;
}
