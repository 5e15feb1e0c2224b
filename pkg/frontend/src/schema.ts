/**
 * Client-side mirror of the server's document contracts. Drafts are only
 * submitted once they parse here, so the UI never emits a document the
 * server would reject as malformed.
 */

import { z } from 'zod';

export const conditionSchema = z.object({
  attribute: z.string().min(1),
  op: z.enum(['eq', 'ne', 'lt', 'le', 'gt', 'ge', 'in_set']),
  value: z.unknown(),
});

export const actionSchema = z.object({
  attribute: z.string().min(1),
  verb: z.enum(['set', 'add', 'mul']),
  value: z.unknown(),
});

export const policySchema = z
  .object({
    name: z.string().min(1),
    agent_type: z.string().min(1),
    conditions: z.array(conditionSchema),
    actions: z.array(actionSchema).min(1),
    active_from: z.number().int().optional(),
    active_until: z.number().int().optional(),
  })
  .refine(
    (p) =>
      p.active_from === undefined ||
      p.active_until === undefined ||
      p.active_until > p.active_from,
    { message: 'active window is empty' },
  );

export const scenarioSchema = z.object({
  name: z.string().min(1),
  description: z.string().optional(),
  parameters: z.record(z.string(), z.unknown()),
  policies: z.array(policySchema),
  flows: z.record(
    z.string(),
    z.union([z.string().min(1), z.object({ inline: z.string().min(1) })]),
  ),
});

export const settingsSchema = z
  .object({
    duration_steps: z.number().int().positive(),
    iterations_per_scenario: z.number().int().positive(),
    collection_interval: z.number().int().positive(),
  })
  .refine((s) => s.collection_interval <= s.duration_steps, {
    message: 'collection interval exceeds duration',
  });
