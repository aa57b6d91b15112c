/** Browser bootstrap: wires the API client, view models, and DOM together.
 *
 * All state here is a view cache — reloading the page rebuilds everything
 * from API reads. Base polling every second, accelerated by the long-polled
 * event cursor. API and connectivity failures land in a dismissible banner
 * and never tear the page down.
 */

import { ApiError, ControlClient } from "./api.js";
import type { PipelineItem, PlanView } from "./model.js";
import {
  SessionTracker,
  pipelineItem,
  planView,
  fleetCards,
  sinkPreviews,
  tickerLines,
} from "./model.js";
import {
  renderErrorBanner,
  renderFleet,
  renderPipelineList,
  renderPlan,
  renderSessionList,
  renderSessionPanel,
  renderTicker,
  renderViolations,
} from "./render.js";

import type { PlatformEvent, SessionInfo, SessionRow } from "./api.js";

const POLL_MS = 1000;

interface ViewCache {
  pipelines: PipelineItem[];
  sessions: SessionRow[];
  selectedPipeline: string | null;
  selectedSession: string | null;
  sessionInfo: SessionInfo | null;
  plan: PlanView | null;
  events: PlatformEvent[];
  cursor: number;
  error: string | null;
}

const cache: ViewCache = {
  pipelines: [],
  sessions: [],
  selectedPipeline: null,
  selectedSession: null,
  sessionInfo: null,
  plan: null,
  events: [],
  cursor: 0,
  error: null,
};

const tracker = new SessionTracker();
const client = new ControlClient("");

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing container #${id}`);
  return node;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}

function showError(err: unknown): void {
  cache.error = describe(err);
  el("errors").innerHTML = renderErrorBanner(cache.error);
}

function chosenMode(): "greedy" | "exhaustive" {
  const box = document.getElementById("mode-exhaustive") as HTMLInputElement | null;
  return box?.checked ? "exhaustive" : "greedy";
}

async function refreshFleet(): Promise<void> {
  el("fleet").innerHTML = renderFleet(fleetCards(await client.processors()));
}

async function refreshPipelines(): Promise<void> {
  const ids = await client.pipelines();
  const details = await Promise.all(ids.map((id) => client.pipeline(id)));
  cache.pipelines = details.map(pipelineItem);
  if (cache.selectedPipeline !== null && !ids.includes(cache.selectedPipeline)) {
    cache.selectedPipeline = null;
  }
  el("pipelines").innerHTML = renderPipelineList(cache.pipelines, cache.selectedPipeline);
  const chosen = cache.pipelines.find((p) => p.id === cache.selectedPipeline);
  el("pipeline-detail").innerHTML = chosen ? renderViolations(chosen.violations) : "";
}

async function refreshSessions(): Promise<void> {
  cache.sessions = await client.sessions();
  if (cache.selectedSession === null && cache.sessions.length > 0) {
    cache.selectedSession = cache.sessions[cache.sessions.length - 1]!.session;
  }
  el("sessions").innerHTML = renderSessionList(cache.sessions, cache.selectedSession);
  if (cache.selectedSession !== null) {
    cache.sessionInfo = await client.session(cache.selectedSession);
    el("session-panel").innerHTML = renderSessionPanel(
      cache.sessionInfo,
      tracker.chain(cache.selectedSession),
      sinkPreviews(cache.sessionInfo),
    );
  }
}

async function refreshAll(): Promise<void> {
  try {
    await Promise.all([refreshFleet(), refreshPipelines(), refreshSessions()]);
  } catch (err) {
    showError(err);
  }
}

async function eventLoop(): Promise<void> {
  for (;;) {
    try {
      const batch = await client.events(cache.cursor, 25);
      if (batch.events.length > 0) {
        cache.cursor = batch.events[batch.events.length - 1]!.seq;
        cache.events.push(...batch.events);
        cache.events = cache.events.slice(-200);
        tracker.applyAll(batch.events);
        el("ticker").innerHTML = renderTicker(tickerLines(cache.events));
        await refreshAll();
      } else {
        cache.cursor = Math.max(cache.cursor, batch.latest);
      }
    } catch {
      // transient: the base poll keeps the view alive; retry shortly
      await new Promise((resolve) => setTimeout(resolve, POLL_MS));
    }
  }
}

async function onAction(action: () => Promise<void>): Promise<void> {
  try {
    await action();
    cache.error = null;
    el("errors").innerHTML = "";
  } catch (err) {
    showError(err);
  }
  await refreshAll();
}

function onClick(event: Event): void {
  const target = event.target as HTMLElement | null;
  if (target === null) return;

  const pick = target.closest<HTMLElement>(".pipeline-pick");
  if (pick?.dataset["pipeline"]) {
    cache.selectedPipeline = pick.dataset["pipeline"];
    cache.plan = null;
    el("plan").innerHTML = renderPlan(null);
    void refreshAll();
    return;
  }
  const sessionPick = target.closest<HTMLElement>(".session-pick");
  if (sessionPick?.dataset["session"]) {
    cache.selectedSession = sessionPick.dataset["session"];
    void refreshAll();
    return;
  }
  if (target.id === "plan-button" && cache.selectedPipeline !== null) {
    const id = cache.selectedPipeline;
    void onAction(async () => {
      cache.plan = planView(await client.plan(id, chosenMode()));
      el("plan").innerHTML = renderPlan(cache.plan);
    });
    return;
  }
  if (target.id === "start-button" && cache.selectedPipeline !== null) {
    const id = cache.selectedPipeline;
    void onAction(async () => {
      const run = await client.start(id, chosenMode());
      cache.selectedSession = run.session;
    });
    return;
  }
  if (target.id === "stop-session" && target.dataset["session"]) {
    const session = target.dataset["session"];
    void onAction(async () => {
      await client.stop(session);
    });
    return;
  }
  if (target.id === "dismiss-error") {
    cache.error = null;
    el("errors").innerHTML = "";
  }
}

function bootstrap(): void {
  document.addEventListener("click", onClick);
  void refreshAll();
  void eventLoop();
  setInterval(() => void refreshAll(), POLL_MS);
}

document.addEventListener("DOMContentLoaded", bootstrap);
