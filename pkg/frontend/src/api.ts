import { z } from "zod";
import {
  DeriveSchema,
  DiagramSchema,
  ProblemDetailSchema,
  SummarySchema,
  TreeSchema,
  ZeroRoundSchema,
  type DeriveResult,
  type DiagramData,
  type GeneratorSpec,
  type ProblemDetail,
  type Side,
  type Summary,
  type TreeData,
  type ZeroRoundResult,
} from "./types.js";

/** An HTTP error carrying the server's {error, detail} payload. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

const SessionSchema = z.object({ v: z.literal(1), session_id: z.string() });
const LoadSchema = z.object({
  v: z.literal(1),
  pid: z.string(),
  summary: SummarySchema,
});
export type LoadResult = { pid: string; summary: Summary };

export class ApiClient {
  constructor(
    readonly base: string = "",
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    schema: z.ZodType<T>,
    body?: unknown,
  ): Promise<T> {
    const res = await this.fetchFn(this.base + path, {
      method,
      headers:
        body !== undefined ? { "content-type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload: unknown = await res.json();
    if (!res.ok) {
      const p = payload as { error?: string; detail?: string };
      throw new ApiError(
        res.status,
        p.error ?? "error",
        p.detail ?? res.statusText,
      );
    }
    return schema.parse(payload);
  }

  async createSession(): Promise<string> {
    const out = await this.request("POST", "/api/sessions", SessionSchema);
    return out.session_id;
  }

  async loadText(sid: string, text: string): Promise<LoadResult> {
    return this.request("POST", `/api/sessions/${sid}/problems`, LoadSchema, {
      text,
    });
  }

  async loadGenerator(sid: string, spec: GeneratorSpec): Promise<LoadResult> {
    return this.request("POST", `/api/sessions/${sid}/problems`, LoadSchema, {
      generator: spec,
    });
  }

  getProblem(sid: string, pid: string): Promise<ProblemDetail> {
    return this.request(
      "GET",
      `/api/sessions/${sid}/problems/${pid}`,
      ProblemDetailSchema,
    );
  }

  re(sid: string, pid: string, method = "combination"): Promise<DeriveResult> {
    return this.request(
      "POST",
      `/api/sessions/${sid}/problems/${pid}/re`,
      DeriveSchema,
      { method },
    );
  }

  rere(
    sid: string,
    pid: string,
    method = "combination",
  ): Promise<DeriveResult> {
    return this.request(
      "POST",
      `/api/sessions/${sid}/problems/${pid}/rere`,
      DeriveSchema,
      { method },
    );
  }

  merge(sid: string, pid: string, a: string, b: string): Promise<DeriveResult> {
    return this.request(
      "POST",
      `/api/sessions/${sid}/problems/${pid}/merge`,
      DeriveSchema,
      { a, b },
    );
  }

  heuristic(sid: string, pid: string, side: Side): Promise<DeriveResult> {
    return this.request(
      "POST",
      `/api/sessions/${sid}/problems/${pid}/heuristic`,
      DeriveSchema,
      { side },
    );
  }

  diagram(sid: string, pid: string, side: Side): Promise<DiagramData> {
    return this.request(
      "GET",
      `/api/sessions/${sid}/problems/${pid}/diagram?side=${side}`,
      DiagramSchema,
    );
  }

  zeroRound(
    sid: string,
    pid: string,
    colored = true,
  ): Promise<ZeroRoundResult> {
    return this.request(
      "POST",
      `/api/sessions/${sid}/problems/${pid}/zero-round`,
      ZeroRoundSchema,
      { colored },
    );
  }

  tree(sid: string): Promise<TreeData> {
    return this.request("GET", `/api/sessions/${sid}/tree`, TreeSchema);
  }
}
