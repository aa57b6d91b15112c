import { describe, expect, it } from "vitest";

import type { PlanDoc, PlatformEvent, ProcessorRow, SessionInfo } from "../src/api.js";
import {
  SessionTracker,
  canStop,
  fleetCards,
  occupancyRatio,
  percentLabel,
  planView,
  sinkPreviews,
  tickerLines,
  validationBadge,
  walksThrough,
} from "../src/model.js";

function processor(overrides: Partial<ProcessorRow> = {}): ProcessorRow {
  return {
    id: "p1",
    ham: "h",
    accept_tag: "fpga.xilinx.virtex.revb",
    backend_kind: "simulated-fpga",
    capacity: { luts: 100 },
    occupancy: { luts: 60 },
    deployments: 1,
    reconfigurations: 3,
    ...overrides,
  };
}

describe("occupancyRatio", () => {
  it("is the exact fraction of capacity in use", () => {
    expect(occupancyRatio(60, 100)).toBe(0.6);
    expect(occupancyRatio(0, 100)).toBe(0);
    expect(occupancyRatio(100, 100)).toBe(1);
    expect(occupancyRatio(1, 3)).toBe(1 / 3);
  });

  it("never renders above capacity", () => {
    expect(occupancyRatio(120, 100)).toBe(1);
    expect(occupancyRatio(5, 0)).toBe(1);
    expect(occupancyRatio(0, 0)).toBe(0);
  });

  it("labels round to whole percent", () => {
    expect(percentLabel(0.6)).toBe("60%");
    expect(percentLabel(1 / 3)).toBe("33%");
    expect(percentLabel(0)).toBe("0%");
  });
});

describe("fleetCards", () => {
  it("emits one gauge per capacity resource, sorted", () => {
    const cards = fleetCards([
      processor({ capacity: { slots: 4, mem: 8 }, occupancy: { slots: 1 } }),
    ]);
    expect(cards).toHaveLength(1);
    expect(cards[0].gauges.map((g) => g.resource)).toEqual(["mem", "slots"]);
    const slots = cards[0].gauges[1];
    expect(slots).toMatchObject({ used: 1, capacity: 4, ratio: 0.25, percentLabel: "25%" });
    expect(cards[0].gauges[0]).toMatchObject({ used: 0, capacity: 8, ratio: 0 });
  });

  it("carries fleet metadata through", () => {
    const card = fleetCards([processor()])[0];
    expect(card).toMatchObject({
      id: "p1",
      acceptTag: "fpga.xilinx.virtex.revb",
      backendKind: "simulated-fpga",
      reconfigurations: 3,
    });
    expect(card.gauges[0].ratio).toBe(0.6);
  });
});

describe("validationBadge", () => {
  const violation = (severity: "error" | "warning") => ({
    code: "X",
    severity,
    shell_id: "s",
    port: null,
    message: "",
  });

  it("maps severity to a badge", () => {
    expect(validationBadge([])).toBe("ok");
    expect(validationBadge([violation("warning")])).toBe("warnings");
    expect(validationBadge([violation("warning"), violation("error")])).toBe("invalid");
  });
});

describe("planView", () => {
  it("sorts complete assignments by shell", () => {
    const plan: PlanDoc = {
      status: "complete",
      mode: "greedy",
      assignments: {
        b: { implementation: "ib", processor: "p2" },
        a: { implementation: "ia", processor: "p1" },
      },
    };
    const view = planView(plan);
    expect(view.kind).toBe("complete");
    if (view.kind === "complete") {
      expect(view.rows.map((r) => r.shell)).toEqual(["a", "b"]);
    }
  });

  it("keeps every rejection of an infeasible plan", () => {
    const plan: PlanDoc = {
      status: "infeasible",
      mode: "greedy",
      assignments: {},
      report: {
        rejections: [
          { shell: "s", implementation: "i", processor: "p2", reason: "incompatible" },
          { shell: "s", implementation: "i", processor: "p1", reason: "undeployable" },
        ],
      },
    };
    const view = planView(plan);
    expect(view.kind).toBe("infeasible");
    if (view.kind === "infeasible") {
      expect(view.rows).toEqual([
        { shell: "s", implementation: "i", processor: "p1", reason: "undeployable" },
        { shell: "s", implementation: "i", processor: "p2", reason: "incompatible" },
      ]);
    }
  });
});

describe("SessionTracker", () => {
  const event = (seq: number, session: string, state: string): PlatformEvent => ({
    seq,
    ts: 0,
    kind: "session_state",
    data: { session, state },
  });

  it("builds one transition chain per session", () => {
    const tracker = new SessionTracker();
    tracker.applyAll([
      event(1, "s1", "created"),
      event(2, "s1", "running"),
      event(3, "s2", "created"),
      event(4, "s1", "stopping"),
      event(5, "s1", "stopped"),
    ]);
    expect(tracker.chain("s1")).toEqual(["created", "running", "stopping", "stopped"]);
    expect(tracker.chain("s2")).toEqual(["created"]);
    expect(tracker.latest("s1")).toBe("stopped");
    expect(tracker.sessions()).toEqual(["s1", "s2"]);
  });

  it("collapses repeated states and ignores other kinds", () => {
    const tracker = new SessionTracker();
    tracker.applyAll([
      event(1, "s1", "running"),
      event(2, "s1", "running"),
      { seq: 3, ts: 0, kind: "plan_computed", data: { session: "s1", state: "bogus" } },
    ]);
    expect(tracker.chain("s1")).toEqual(["running"]);
  });
});

describe("walksThrough", () => {
  it("accepts chains that visit the milestones in order", () => {
    expect(walksThrough(["created", "running", "stopping", "stopped"], ["created", "running", "stopped"])).toBe(true);
    expect(walksThrough(["created", "running"], ["created", "running", "stopped"])).toBe(false);
    expect(walksThrough(["running", "created", "stopped"], ["created", "running", "stopped"])).toBe(false);
  });
});

describe("canStop", () => {
  it("tracks the session state machine", () => {
    expect(canStop("created")).toBe(true);
    expect(canStop("running")).toBe(true);
    expect(canStop("stopping")).toBe(true);
    expect(canStop("stopped")).toBe(false);
    expect(canStop("failed")).toBe(false);
  });
});

describe("sinkPreviews", () => {
  const info = (sinks: SessionInfo["sinks"]): SessionInfo => ({
    session: "s1",
    state: "stopped",
    pipeline: "demo",
    duration_s: 0.1,
    tokens_per_edge: {},
    edge_counters: {},
    processed_per_shell: {},
    sinks,
    error: null,
  });

  it("previews collected values and counts them", () => {
    const previews = sinkPreviews(info({ "sink:a.out": { resource: "collect:", values: [4, 6, 8] } }));
    expect(previews).toEqual([
      { key: "sink:a.out", resource: "collect:", preview: "[4, 6, 8]", total: 3 },
    ]);
  });

  it("truncates long previews and handles file sinks", () => {
    const many = Array.from({ length: 20 }, (_, i) => i);
    const previews = sinkPreviews(
      info({
        long: { resource: "collect:", values: many },
        file: { resource: "file:/tmp/out", path: "/tmp/out" },
      }),
      5,
    );
    expect(previews[0].preview).toBe("[0, 1, 2, 3, 4, …]");
    expect(previews[0].total).toBe(20);
    expect(previews[1]).toMatchObject({ preview: "/tmp/out", total: null });
  });
});

describe("tickerLines", () => {
  it("formats each event kind and keeps only the tail", () => {
    const events: PlatformEvent[] = [
      { seq: 1, ts: 60, kind: "ham_loaded", data: { ham_id: "host-box" } },
      { seq: 2, ts: 60, kind: "pipeline_loaded", data: { id: "demo" } },
      { seq: 3, ts: 60, kind: "plan_computed", data: { pipeline: "demo", status: "complete", mode: "greedy" } },
      { seq: 4, ts: 60, kind: "session_state", data: { session: "s1", state: "running" } },
    ];
    const lines = tickerLines(events);
    expect(lines[0]).toContain("manifest host-box loaded");
    expect(lines[1]).toContain("pipeline demo loaded");
    expect(lines[2]).toContain("plan for demo: complete (greedy)");
    expect(lines[3]).toContain("session s1 → running");
    expect(tickerLines(events, 2)).toHaveLength(2);
  });
});
