import { z } from "zod";

export const SummarySchema = z.object({
  v: z.literal(1),
  pid: z.string(),
  name: z.string(),
  op: z.string(),
  params: z.record(z.string(), z.unknown()),
  parent: z.string().nullable(),
  hash: z.string().length(64),
  alphabet_size: z.number().int(),
  white_configs: z.number().int(),
  black_configs: z.number().int(),
});
export type Summary = z.infer<typeof SummarySchema>;

export const ProblemDetailSchema = SummarySchema.extend({
  alphabet: z.array(z.string()),
  white: z.array(z.array(z.array(z.string()))),
  black: z.array(z.array(z.array(z.string()))),
  white_arity: z.number().int(),
  black_arity: z.number().int(),
  sets: z.record(z.string(), z.array(z.string())).nullable(),
  text: z.string(),
});
export type ProblemDetail = z.infer<typeof ProblemDetailSchema>;

export const DiagramSchema = z.object({
  v: z.literal(1),
  side: z.enum(["white", "black"]),
  nodes: z.array(z.string()),
  edges: z.array(z.tuple([z.string(), z.string()])),
  equal_pairs: z.array(z.tuple([z.string(), z.string()])),
  heuristic_pair: z.tuple([z.string(), z.string()]).nullable(),
});
export type DiagramData = z.infer<typeof DiagramSchema>;

export const DeriveSchema = z.object({
  v: z.literal(1),
  new_pid: z.string().nullable(),
  summary: SummarySchema.optional(),
  pair: z.tuple([z.string(), z.string()]).nullable().optional(),
  detail: z.string().optional(),
  diff: z
    .object({
      alphabet_size: z.tuple([z.number(), z.number()]),
      white_configs: z.tuple([z.number(), z.number()]),
      black_configs: z.tuple([z.number(), z.number()]),
    })
    .optional(),
});
export type DeriveResult = z.infer<typeof DeriveSchema>;

export const ZeroRoundSchema = z.object({
  v: z.literal(1),
  solvable: z.boolean(),
  witness: z
    .union([z.record(z.string(), z.string()), z.array(z.string())])
    .optional(),
});
export type ZeroRoundResult = z.infer<typeof ZeroRoundSchema>;

export const TreeSchema = z.object({
  v: z.literal(1),
  session_id: z.string(),
  nodes: z.array(SummarySchema),
  edges: z.array(
    z.object({ parent: z.string(), child: z.string(), op: z.string() }),
  ),
});
export type TreeData = z.infer<typeof TreeSchema>;

export type Side = "white" | "black";

export type GeneratorSpec = {
  kind: "ghz" | "chsh" | "pi" | "pi-prime";
  delta: number;
  i?: number;
};
