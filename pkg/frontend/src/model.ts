/** Pure view-model derivation: wire shapes in, render-ready rows out. */

import type {
  PipelineDetail,
  PlanDoc,
  PlatformEvent,
  ProcessorRow,
  Rejection,
  SessionInfo,
  Violation,
} from "./api.js";

// --- fleet -------------------------------------------------------------

export interface ResourceGauge {
  resource: string;
  used: number;
  capacity: number;
  /** exact fraction of capacity in use, clamped to [0, 1] for rendering */
  ratio: number;
  percentLabel: string;
}

export interface FleetCard {
  id: string;
  ham: string;
  acceptTag: string;
  backendKind: string;
  deployments: number;
  reconfigurations: number;
  gauges: ResourceGauge[];
}

/** Fraction of capacity in use; rendered occupancy never exceeds capacity. */
export function occupancyRatio(used: number, capacity: number): number {
  if (capacity <= 0) return used > 0 ? 1 : 0;
  return Math.min(used / capacity, 1);
}

export function percentLabel(ratio: number): string {
  return `${Math.round(ratio * 100)}%`;
}

export function fleetCards(processors: ProcessorRow[]): FleetCard[] {
  return processors.map((p) => ({
    id: p.id,
    ham: p.ham,
    acceptTag: p.accept_tag,
    backendKind: p.backend_kind,
    deployments: p.deployments,
    reconfigurations: p.reconfigurations,
    gauges: Object.keys(p.capacity)
      .sort()
      .map((resource) => {
        const used = p.occupancy[resource] ?? 0;
        const capacity = p.capacity[resource] ?? 0;
        const ratio = occupancyRatio(used, capacity);
        return { resource, used, capacity, ratio, percentLabel: percentLabel(ratio) };
      }),
  }));
}

// --- pipelines ----------------------------------------------------------

export type ValidationBadge = "ok" | "warnings" | "invalid";

export function validationBadge(violations: Violation[]): ValidationBadge {
  if (violations.some((v) => v.severity === "error")) return "invalid";
  return violations.length > 0 ? "warnings" : "ok";
}

export interface PipelineItem {
  id: string;
  badge: ValidationBadge;
  violations: Violation[];
}

export function pipelineItem(detail: PipelineDetail): PipelineItem {
  return { id: detail.id, badge: validationBadge(detail.violations), violations: detail.violations };
}

// --- plan ----------------------------------------------------------------

export interface AssignmentRow {
  shell: string;
  implementation: string;
  processor: string;
}

export type PlanView =
  | { kind: "complete"; mode: string; rows: AssignmentRow[] }
  | { kind: "infeasible"; mode: string; rows: Rejection[] };

export function planView(plan: PlanDoc): PlanView {
  if (plan.status === "complete") {
    const rows = Object.entries(plan.assignments)
      .map(([shell, a]) => ({ shell, implementation: a.implementation, processor: a.processor }))
      .sort((a, b) => a.shell.localeCompare(b.shell));
    return { kind: "complete", mode: plan.mode, rows };
  }
  const rows = [...(plan.report?.rejections ?? [])].sort(
    (a, b) =>
      a.shell.localeCompare(b.shell) ||
      a.implementation.localeCompare(b.implementation) ||
      a.processor.localeCompare(b.processor),
  );
  return { kind: "infeasible", mode: plan.mode, rows };
}

// --- sessions ---------------------------------------------------------------

export const TERMINAL_STATES = new Set(["stopped", "failed"]);

/** A stop request is legal only while the session can still make progress. */
export function canStop(state: string): boolean {
  return state === "created" || state === "running" || state === "stopping";
}

/**
 * Orders session states as delivered by the event stream, one chain per
 * session, dropping immediate repeats so the chain reads as transitions.
 */
export class SessionTracker {
  private chains = new Map<string, string[]>();

  apply(event: PlatformEvent): void {
    if (event.kind !== "session_state") return;
    const session = String(event.data["session"] ?? "");
    const state = String(event.data["state"] ?? "");
    if (!session || !state) return;
    const chain = this.chains.get(session) ?? [];
    if (chain[chain.length - 1] !== state) chain.push(state);
    this.chains.set(session, chain);
  }

  applyAll(events: PlatformEvent[]): void {
    for (const event of events) this.apply(event);
  }

  chain(session: string): string[] {
    return [...(this.chains.get(session) ?? [])];
  }

  latest(session: string): string | null {
    const chain = this.chains.get(session);
    return chain && chain.length > 0 ? chain[chain.length - 1]! : null;
  }

  sessions(): string[] {
    return [...this.chains.keys()];
  }
}

/** True when `chain` walks the given milestones in order (gaps allowed). */
export function walksThrough(chain: string[], milestones: string[]): boolean {
  let at = 0;
  for (const state of chain) {
    if (state === milestones[at]) at += 1;
    if (at === milestones.length) return true;
  }
  return milestones.length === 0;
}

export interface SinkPreview {
  key: string;
  resource: string;
  preview: string;
  total: number | null;
}

export function sinkPreviews(info: SessionInfo, limit = 12): SinkPreview[] {
  return Object.entries(info.sinks).map(([key, sink]) => {
    if (Array.isArray(sink.values)) {
      const head = sink.values.slice(0, limit).join(", ");
      const more = sink.values.length > limit ? ", …" : "";
      return { key, resource: sink.resource, preview: `[${head}${more}]`, total: sink.values.length };
    }
    return { key, resource: sink.resource, preview: sink.path ?? "(external)", total: null };
  });
}

// --- event ticker --------------------------------------------------------------

export function tickerLine(event: PlatformEvent): string {
  const at = new Date(event.ts * 1000).toISOString().slice(11, 19);
  switch (event.kind) {
    case "ham_loaded":
      return `${at} manifest ${event.data["ham_id"]} loaded`;
    case "pipeline_loaded":
      return `${at} pipeline ${event.data["id"]} loaded`;
    case "plan_computed":
      return `${at} plan for ${event.data["pipeline"]}: ${event.data["status"]} (${event.data["mode"]})`;
    case "session_state":
      return `${at} session ${event.data["session"]} → ${event.data["state"]}`;
    default:
      return `${at} ${event.kind}`;
  }
}

export function tickerLines(events: PlatformEvent[], limit = 50): string[] {
  return events.slice(-limit).map(tickerLine);
}
