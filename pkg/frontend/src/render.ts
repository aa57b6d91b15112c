/** HTML builders: view models in, markup strings out. No DOM access here. */

import type { SessionInfo, SessionRow, Violation } from "./api.js";
import type { FleetCard, PipelineItem, PlanView, SinkPreview } from "./model.js";
import { canStop } from "./model.js";

export function escapeHtml(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const esc = escapeHtml;

// --- fleet -------------------------------------------------------------

export function renderFleet(cards: FleetCard[]): string {
  if (cards.length === 0) {
    return `<p class="empty">No processors. Load a hardware manifest to populate the fleet.</p>`;
  }
  return cards.map(renderFleetCard).join("");
}

function renderFleetCard(card: FleetCard): string {
  const gauges = card.gauges
    .map(
      (g) => `
      <div class="gauge" data-resource="${esc(g.resource)}" data-ratio="${g.ratio}">
        <span class="gauge-label">${esc(g.resource)} ${g.used}/${g.capacity} (${esc(g.percentLabel)})</span>
        <div class="bar"><div class="bar-fill" style="width:${g.ratio * 100}%"></div></div>
      </div>`,
    )
    .join("");
  const reconfig =
    card.backendKind === "simulated-fpga"
      ? `<span class="meta">reconfigurations ${card.reconfigurations}</span>`
      : "";
  return `
  <article class="card processor" data-processor="${esc(card.id)}">
    <header>
      <strong>${esc(card.id)}</strong>
      <code>${esc(card.acceptTag)}</code>
    </header>
    <span class="meta">${esc(card.backendKind)} · manifest ${esc(card.ham)} · ${card.deployments} deployed</span>
    ${reconfig}
    ${gauges}
  </article>`;
}

// --- pipelines ----------------------------------------------------------

export function renderPipelineList(items: PipelineItem[], selected: string | null): string {
  if (items.length === 0) {
    return `<p class="empty">No pipelines loaded yet.</p>`;
  }
  const rows = items
    .map(
      (item) => `
      <li>
        <button class="pipeline-pick ${item.id === selected ? "selected" : ""}"
                data-pipeline="${esc(item.id)}">
          ${esc(item.id)} <span class="badge badge-${item.badge}">${item.badge}</span>
        </button>
      </li>`,
    )
    .join("");
  return `<ul class="pipeline-list">${rows}</ul>`;
}

export function renderViolations(violations: Violation[]): string {
  if (violations.length === 0) return "";
  const rows = violations
    .map(
      (v) => `
      <tr class="sev-${esc(v.severity)}">
        <td>${esc(v.code)}</td>
        <td>${esc(v.shell_id)}${v.port ? "." + esc(v.port) : ""}</td>
        <td>${esc(v.message)}</td>
      </tr>`,
    )
    .join("");
  return `<table class="violations"><thead><tr><th>code</th><th>where</th><th>detail</th></tr></thead><tbody>${rows}</tbody></table>`;
}

// --- plan ----------------------------------------------------------------

export function renderPlan(view: PlanView | null): string {
  if (view === null) {
    return `<p class="empty">Pick a pipeline and press Plan.</p>`;
  }
  if (view.kind === "complete") {
    const rows = view.rows
      .map(
        (r) => `
        <tr>
          <td>${esc(r.shell)}</td>
          <td>${esc(r.implementation)}</td>
          <td>${esc(r.processor)}</td>
        </tr>`,
      )
      .join("");
    return `
    <p class="plan-status plan-complete">complete (${esc(view.mode)})</p>
    <table class="plan"><thead><tr><th>shell</th><th>implementation</th><th>processor</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
  }
  const rows = view.rows
    .map(
      (r) => `
      <tr>
        <td>${esc(r.shell)}</td>
        <td>${esc(r.implementation)}</td>
        <td>${esc(r.processor) || "—"}</td>
        <td class="reason">${esc(r.reason)}</td>
      </tr>`,
    )
    .join("");
  return `
  <p class="plan-status plan-infeasible">infeasible (${esc(view.mode)})</p>
  <table class="plan rejections"><thead><tr><th>shell</th><th>implementation</th><th>processor</th><th>reason</th></tr></thead>
  <tbody>${rows}</tbody></table>`;
}

// --- sessions ---------------------------------------------------------------

export function renderSessionList(rows: SessionRow[], selected: string | null): string {
  if (rows.length === 0) {
    return `<p class="empty">No sessions yet.</p>`;
  }
  const items = rows
    .map(
      (s) => `
      <li>
        <button class="session-pick ${s.session === selected ? "selected" : ""}"
                data-session="${esc(s.session)}">
          ${esc(s.session)} <span class="state state-${esc(s.state)}">${esc(s.state)}</span>
          <span class="meta">${esc(s.pipeline ?? "?")}</span>
        </button>
      </li>`,
    )
    .join("");
  return `<ul class="session-list">${items}</ul>`;
}

export function renderSessionPanel(info: SessionInfo | null, chain: string[], previews: SinkPreview[]): string {
  if (info === null) {
    return `<p class="empty">Start a pipeline or pick a session.</p>`;
  }
  const walk = chain.length > 0 ? chain : [info.state];
  const breadcrumbs = walk
    .map((s) => `<span class="state state-${esc(s)}">${esc(s)}</span>`)
    .join(" → ");
  const counters = Object.entries(info.processed_per_shell)
    .map(([shell, n]) => `<tr><td>${esc(shell)}</td><td>${n}</td></tr>`)
    .join("");
  const edges = Object.entries(info.tokens_per_edge)
    .map(([edge, n]) => `<tr><td>${esc(edge)}</td><td>${n}</td></tr>`)
    .join("");
  const sinks = previews
    .map(
      (p) => `
      <li data-sink="${esc(p.key)}"><code>${esc(p.resource)}</code> ${esc(p.preview)}${
        p.total !== null ? ` <span class="meta">(${p.total} values)</span>` : ""
      }</li>`,
    )
    .join("");
  const error = info.error === null ? "" : `<p class="session-error">error: ${esc(info.error)}</p>`;
  const stopDisabled = canStop(info.state) ? "" : "disabled";
  return `
  <header>
    <strong>${esc(info.session)}</strong>
    <span class="meta">pipeline ${esc(info.pipeline ?? "?")} · ${info.duration_s.toFixed(2)}s</span>
    <button id="stop-session" data-session="${esc(info.session)}" ${stopDisabled}>Stop</button>
  </header>
  <p class="chain">${breadcrumbs}</p>
  ${error}
  <div class="counters">
    <table><caption>processed per stage</caption><tbody>${counters}</tbody></table>
    <table><caption>tokens per edge</caption><tbody>${edges}</tbody></table>
  </div>
  <ul class="sinks">${sinks}</ul>`;
}

// --- ticker / errors -----------------------------------------------------------

export function renderTicker(lines: string[]): string {
  if (lines.length === 0) return `<p class="empty">No events yet.</p>`;
  return `<ul class="ticker">${lines.map((l) => `<li>${esc(l)}</li>`).join("")}</ul>`;
}

export function renderErrorBanner(message: string | null): string {
  if (message === null) return "";
  return `<div class="error-banner">${esc(message)} <button id="dismiss-error">×</button></div>`;
}
