/** Deterministic generators shared by the test files. */

import type {
  ActionRow,
  ConditionRow,
  PolicyFormState,
} from '../src/policy-form.js';
import { allowedOps, allowedVerbs, newActionRow, newConditionRow } from '../src/policy-form.js';
import type { AgentTypeInfo, PolicyDoc } from '../src/types.js';

/** Small deterministic PRNG (mulberry32) so test cases are reproducible. */
export function makeRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function pick<T>(rng: () => number, items: readonly T[]): T {
  return items[Math.floor(rng() * items.length)];
}

/** Agent type mirroring the built-in demo bundle's schema. */
export const MIGRANT: AgentTypeInfo = {
  name: 'migrant',
  attribute_schema: [
    { name: 'employed', tag: 'bool', default: false },
    { name: 'savings', tag: 'real', default: 0.0 },
    { name: 'months_unemployed', tag: 'int', default: 0 },
    { name: 'region', tag: 'region', default: 'R1' },
  ],
  behaviors: ['seek_job', 'earn_and_spend', 'consider_relocation'],
};

function randomValue(rng: () => number, tag: string): unknown {
  switch (tag) {
    case 'bool':
      return rng() < 0.5;
    case 'int':
      return Math.floor(rng() * 10);
    case 'real':
      return Math.round(rng() * 1000) / 100;
    default:
      return `R${1 + Math.floor(rng() * 8)}`;
  }
}

export function randomCondition(rng: () => number, info: AgentTypeInfo): ConditionRow {
  const entry = pick(rng, info.attribute_schema);
  const row = newConditionRow(info, entry.name);
  row.op = pick(rng, allowedOps(entry.tag));
  row.value = row.op === 'in_set' ? [randomValue(rng, entry.tag)] : randomValue(rng, entry.tag);
  return row;
}

export function randomAction(rng: () => number, info: AgentTypeInfo): ActionRow {
  const entry = pick(rng, info.attribute_schema);
  const row = newActionRow(info, entry.name);
  row.verb = pick(rng, allowedVerbs(entry.tag));
  row.value = randomValue(rng, entry.tag);
  return row;
}

export function randomForm(rng: () => number, info: AgentTypeInfo, index: number): PolicyFormState {
  const form: PolicyFormState = {
    name: `policy-${index}`,
    agentType: info.name,
    conditions: [],
    actions: [],
    activeFrom: null,
    activeUntil: null,
  };
  const nConditions = Math.floor(rng() * 3);
  for (let i = 0; i < nConditions; i += 1) form.conditions.push(randomCondition(rng, info));
  const nActions = 1 + Math.floor(rng() * 2);
  for (let i = 0; i < nActions; i += 1) form.actions.push(randomAction(rng, info));
  if (rng() < 0.5) {
    form.activeFrom = Math.floor(rng() * 50);
    if (rng() < 0.5) form.activeUntil = form.activeFrom + 1 + Math.floor(rng() * 50);
  }
  return form;
}

export function randomPolicyDoc(rng: () => number, info: AgentTypeInfo, index: number): PolicyDoc {
  const form = randomForm(rng, info, index);
  const doc: PolicyDoc = {
    name: form.name,
    agent_type: form.agentType,
    conditions: form.conditions,
    actions: form.actions,
  };
  if (form.activeFrom !== null) doc.active_from = form.activeFrom;
  if (form.activeUntil !== null) doc.active_until = form.activeUntil;
  return doc;
}

export const RAW_FLOW_XML = `<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="label" attr.type="string"/>
  <key id="d2" for="edge" attr.name="w" attr.type="double"/>
  <graph edgedefault="directed">
    <node id="start"><data key="d0">start</data></node>
    <node id="n0"><data key="d0">seek_job</data></node>
    <edge source="start" target="n0"><data key="d2">1.0</data></edge>
  </graph>
</graphml>`;
