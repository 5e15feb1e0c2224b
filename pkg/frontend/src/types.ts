/** Payload shapes of the engine's HTTP API. */

export type AttributeTag = 'real' | 'int' | 'bool' | 'categorical' | 'region';

export interface AttributeSchemaEntry {
  name: string;
  tag: AttributeTag;
  default: unknown;
}

export interface AgentTypeInfo {
  name: string;
  attribute_schema: AttributeSchemaEntry[];
  behaviors: string[];
}

export type ConditionOp = 'eq' | 'ne' | 'lt' | 'le' | 'gt' | 'ge' | 'in_set';
export type ActionVerb = 'set' | 'add' | 'mul';

export interface PolicyCondition {
  attribute: string;
  op: ConditionOp;
  value: unknown;
}

export interface PolicyActionDoc {
  attribute: string;
  verb: ActionVerb;
  value: unknown;
}

export interface PolicyDoc {
  name: string;
  agent_type: string;
  conditions: PolicyCondition[];
  actions: PolicyActionDoc[];
  active_from?: number;
  active_until?: number;
}

export interface ScenarioDoc {
  name: string;
  description?: string;
  parameters: Record<string, unknown>;
  policies: PolicyDoc[];
  flows: Record<string, string | { inline: string }>;
}

export interface ComparisonRowDoc {
  facet: 'parameter' | 'policy' | 'flow';
  name: string;
  cells: string[];
  differs: boolean;
}

export interface ComparisonTableDoc {
  columns: string[];
  rows: ComparisonRowDoc[];
}

export interface JobStatusDoc {
  job_id: string;
  state: 'queued' | 'running' | 'completed' | 'failed';
  progress: { completed_runs: number; total_runs: number };
  sample_ticks: number[];
  scenario_ids: string[];
  error: string;
}

export interface AggregateSeriesDoc {
  scenario_id: string;
  reporter: string;
  ticks: number[];
  mean: number[];
  std: number[];
  min: number[];
  max: number[];
  count: number;
}

export interface ChoroplethFrameDoc {
  reporter: string;
  tick: number;
  statistic: string;
  values: Record<string, number>;
}

export interface Diagnostic {
  code: string;
  message: string;
  where: string;
}
