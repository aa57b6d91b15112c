/** Typed client for the control-service HTTP API (versioned JSON envelopes). */

export interface ProcessorRow {
  id: string;
  ham: string;
  accept_tag: string;
  backend_kind: string;
  capacity: Record<string, number>;
  occupancy: Record<string, number>;
  deployments: number;
  reconfigurations: number;
}

export interface Violation {
  code: string;
  severity: "error" | "warning";
  shell_id: string;
  port: string | null;
  message: string;
}

export interface PipelineDetail {
  id: string;
  doc: Record<string, unknown>;
  violations: Violation[];
}

export interface Rejection {
  shell: string;
  implementation: string;
  processor: string;
  reason: string;
}

export interface PlanDoc {
  status: "complete" | "infeasible";
  mode: string;
  assignments: Record<string, { implementation: string; processor: string }>;
  report?: { rejections: Rejection[] };
}

export interface SessionRow {
  session: string;
  state: string;
  pipeline: string | null;
}

export interface SinkEntry {
  resource: string;
  values?: unknown[];
  path?: string | null;
}

export interface SessionInfo {
  session: string;
  state: string;
  pipeline: string | null;
  duration_s: number;
  tokens_per_edge: Record<string, number>;
  edge_counters: Record<string, { produced: number; consumed: number }>;
  processed_per_shell: Record<string, number>;
  sinks: Record<string, SinkEntry>;
  error: string | null;
}

export interface PlatformEvent {
  seq: number;
  ts: number;
  kind: string;
  data: Record<string, unknown>;
}

export interface EventBatch {
  events: PlatformEvent[];
  latest: number;
}

/** Structured failure: carries the service's machine-readable error code. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: Record<string, unknown>;

  constructor(code: string, message: string, status: number, details: Record<string, unknown> = {}) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.details = details;
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  let body: Record<string, unknown>;
  try {
    body = (await response.json()) as Record<string, unknown>;
  } catch {
    throw new ApiError("bad_envelope", `non-JSON response (HTTP ${response.status})`, response.status);
  }
  if (!response.ok) {
    const err = (body["error"] ?? {}) as Record<string, unknown>;
    const { code, message, ...details } = err;
    throw new ApiError(
      typeof code === "string" ? code : "unknown",
      typeof message === "string" ? message : `HTTP ${response.status}`,
      response.status,
      details,
    );
  }
  return body as T;
}

export class ControlClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async get<T>(path: string): Promise<T> {
    return unwrap<T>(await fetch(this.url(path)));
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    return unwrap<T>(
      await fetch(this.url(path), {
        method: "POST",
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? null : JSON.stringify(body),
      }),
    );
  }

  async health(): Promise<boolean> {
    const body = await this.get<{ status: string }>("/healthz");
    return body.status === "ok";
  }

  async processors(): Promise<ProcessorRow[]> {
    return (await this.get<{ processors: ProcessorRow[] }>("/processors")).processors;
  }

  async pipelines(): Promise<string[]> {
    return (await this.get<{ pipelines: string[] }>("/pipelines")).pipelines;
  }

  async pipeline(id: string): Promise<PipelineDetail> {
    return (await this.get<{ pipeline: PipelineDetail }>(`/pipelines/${encodeURIComponent(id)}`)).pipeline;
  }

  async loadPipeline(doc: unknown): Promise<PipelineDetail> {
    return (await this.post<{ pipeline: PipelineDetail }>("/pipelines", doc)).pipeline;
  }

  async loadHam(doc: unknown): Promise<{ ham_id: string; processors: string[] }> {
    return (await this.post<{ ham: { ham_id: string; processors: string[] } }>("/hams", doc)).ham;
  }

  async plan(pipelineId: string, mode: "greedy" | "exhaustive" = "greedy"): Promise<PlanDoc> {
    return (
      await this.post<{ plan: PlanDoc }>(`/pipelines/${encodeURIComponent(pipelineId)}/plan?mode=${mode}`)
    ).plan;
  }

  async start(pipelineId: string, mode: "greedy" | "exhaustive" = "greedy"): Promise<SessionRow> {
    return (
      await this.post<{ run: SessionRow }>(`/pipelines/${encodeURIComponent(pipelineId)}/start?mode=${mode}`)
    ).run;
  }

  async stop(sessionId: string): Promise<SessionRow> {
    return (await this.post<{ run: SessionRow }>(`/sessions/${encodeURIComponent(sessionId)}/stop`)).run;
  }

  async sessions(): Promise<SessionRow[]> {
    return (await this.get<{ sessions: SessionRow[] }>("/sessions")).sessions;
  }

  async session(id: string): Promise<SessionInfo> {
    return (await this.get<{ session: SessionInfo }>(`/sessions/${encodeURIComponent(id)}`)).session;
  }

  /** Events after a cursor; waitSeconds > 0 long-polls server-side. */
  async events(after: number, waitSeconds = 0): Promise<EventBatch> {
    const wait = waitSeconds > 0 ? `&wait=${waitSeconds}` : "";
    return this.get<EventBatch>(`/events?after=${after}${wait}`);
  }
}
