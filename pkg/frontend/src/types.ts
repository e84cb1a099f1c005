/** Wire types for the layout server, with runtime validation.
 *
 * The client performs no analytics over these: every number shown on screen
 * comes from the server, and the only client-side math is viewport geometry
 * and pie wedge angle conversion.
 */

import { z } from "zod";

export const regionSchema = z.object({
  type: z.string(),
  cx: z.number(),
  cy: z.number(),
  r: z.number().positive(),
});

export const wedgeSchema = z.object({
  cluster: z.number().int(),
  frac: z.number().positive(),
});

export const layoutNodeSchema = z.object({
  id: z.string(),
  x: z.number(),
  y: z.number(),
  r: z.number().positive(),
  cluster: z.number().int().optional(),
  pie: z.array(wedgeSchema).optional(),
});

export const bundleSchema = z.object({
  id: z.string(),
  anchor: z.tuple([z.number(), z.number()]),
  edges: z.array(z.string()),
  expanded: z.boolean(),
});

export const emphasisSchema = z.object({
  nodes: z.array(z.object({ id: z.string(), scale: z.number() })),
  edges: z.array(z.string()),
  bundles: z.array(bundleSchema),
  paths: z.array(
    z.object({
      criterion: z.string(),
      nodes: z.array(z.string()),
      edges: z.array(z.string()),
    }),
  ),
});

export const layoutSchema = z.object({
  seed: z.number().int(),
  regions: z.array(regionSchema),
  nodes: z.array(layoutNodeSchema),
  hulls: z.array(
    z.object({
      cluster: z.number().int(),
      points: z.array(z.tuple([z.number(), z.number()])),
    }),
  ),
  clusters: z
    .array(z.object({ id: z.number().int(), label: z.string(), size: z.number().int() }))
    .optional(),
  emphasis: emphasisSchema,
});

export const displayedEdgeSchema = z.object({
  id: z.string(),
  source: z.string(),
  target: z.string(),
  relation: z.string(),
});

export const queryResponseSchema = z.object({
  layout: layoutSchema,
  preference: z.object({
    interest_type: z.string(),
    attribute: z.string(),
    attribute_value: z.string(),
    connected_types: z.array(z.string()),
    diversity: z.number(),
  }),
  answer_subgraph: z.object({
    nodes: z.array(
      z.object({ id: z.string(), label: z.string(), type: z.string(), answer: z.boolean() }),
    ),
    edges: z.array(
      z.object({ id: z.string(), source: z.string(), target: z.string(), relation: z.string() }),
    ),
  }),
  displayed_edges: z.array(displayedEdgeSchema),
});

export const contextResponseSchema = z.object({
  layout: layoutSchema,
  displayed_edges: z.array(displayedEdgeSchema),
});

export const insightsSchema = z.object({
  bullets: z.array(z.object({ text: z.string(), refs: z.array(z.string()) })),
  fallback_used: z.boolean(),
  validation_log: z.array(z.string()),
});

export const ontologyViewSchema = z.object({
  types: z.array(z.object({ type: z.string(), x: z.number(), y: z.number() })),
  relations: z.array(
    z.object({ source: z.string(), target: z.string(), relation: z.string() }),
  ),
  distances: z.record(z.record(z.number())),
});

export const searchResponseSchema = z.object({
  matches: z.array(z.object({ id: z.string(), label: z.string(), type: z.string() })),
});

export type LayoutJson = z.infer<typeof layoutSchema>;
export type LayoutNode = z.infer<typeof layoutNodeSchema>;
export type DisplayedEdge = z.infer<typeof displayedEdgeSchema>;
export type QueryResponse = z.infer<typeof queryResponseSchema>;
export type ContextResponse = z.infer<typeof contextResponseSchema>;
export type Insights = z.infer<typeof insightsSchema>;
export type OntologyView = z.infer<typeof ontologyViewSchema>;
export type SearchResponse = z.infer<typeof searchResponseSchema>;
