/**
 * Policy form builder state. Dropdown contents derive from the agent type
 * schema: an attribute's tag determines the ops and verbs offered, so tag
 * mismatches are prevented by construction.
 */

import type {
  ActionVerb,
  AgentTypeInfo,
  AttributeTag,
  ConditionOp,
  PolicyDoc,
} from './types.js';

const ORDERING_OPS: ConditionOp[] = ['lt', 'le', 'gt', 'ge'];

export function allowedOps(tag: AttributeTag): ConditionOp[] {
  if (tag === 'real' || tag === 'int') {
    return ['eq', 'ne', ...ORDERING_OPS, 'in_set'];
  }
  return ['eq', 'ne', 'in_set'];
}

export function allowedVerbs(tag: AttributeTag): ActionVerb[] {
  if (tag === 'real' || tag === 'int') {
    return ['set', 'add', 'mul'];
  }
  return ['set'];
}

export interface ConditionRow {
  attribute: string;
  op: ConditionOp;
  value: unknown;
}

export interface ActionRow {
  attribute: string;
  verb: ActionVerb;
  value: unknown;
}

export interface PolicyFormState {
  name: string;
  agentType: string;
  conditions: ConditionRow[];
  actions: ActionRow[];
  activeFrom: number | null;
  activeUntil: number | null;
}

export function emptyForm(agentType: string): PolicyFormState {
  return {
    name: '',
    agentType,
    conditions: [],
    actions: [],
    activeFrom: null,
    activeUntil: null,
  };
}

/** Load a server policy document into form state. */
export function formFromPolicy(doc: PolicyDoc): PolicyFormState {
  return {
    name: doc.name,
    agentType: doc.agent_type,
    conditions: doc.conditions.map((c) => ({ ...c })),
    actions: doc.actions.map((a) => ({ ...a })),
    activeFrom: doc.active_from ?? null,
    activeUntil: doc.active_until ?? null,
  };
}

/** Serialize form state back to the policy JSON the API accepts. */
export function policyFromForm(form: PolicyFormState): PolicyDoc {
  const doc: PolicyDoc = {
    name: form.name,
    agent_type: form.agentType,
    conditions: form.conditions.map((c) => ({ ...c })),
    actions: form.actions.map((a) => ({ ...a })),
  };
  if (form.activeFrom !== null) doc.active_from = form.activeFrom;
  if (form.activeUntil !== null) doc.active_until = form.activeUntil;
  return doc;
}

/** Human label for the population a policy applies to. */
export function applicabilityLabel(form: PolicyFormState): string {
  if (form.conditions.length === 0) {
    return `applies to all ${form.agentType}s`;
  }
  const parts = form.conditions.map((c) => `${c.attribute} ${c.op} ${JSON.stringify(c.value)}`);
  return `applies when ${parts.join(' and ')}`;
}

export function tagOf(info: AgentTypeInfo, attribute: string): AttributeTag {
  const entry = info.attribute_schema.find((s) => s.name === attribute);
  if (!entry) throw new Error(`unknown attribute: ${attribute}`);
  return entry.tag;
}

/** Default condition row for an attribute, typed from its schema entry. */
export function newConditionRow(info: AgentTypeInfo, attribute: string): ConditionRow {
  const entry = info.attribute_schema.find((s) => s.name === attribute);
  if (!entry) throw new Error(`unknown attribute: ${attribute}`);
  return { attribute, op: 'eq', value: entry.default };
}

export function newActionRow(info: AgentTypeInfo, attribute: string): ActionRow {
  const entry = info.attribute_schema.find((s) => s.name === attribute);
  if (!entry) throw new Error(`unknown attribute: ${attribute}`);
  const verb = allowedVerbs(entry.tag)[0];
  return { attribute, verb, value: entry.default };
}
