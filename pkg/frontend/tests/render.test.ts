import { describe, expect, it } from "vitest";

import type { SessionInfo } from "../src/api.js";
import { fleetCards, planView, sinkPreviews } from "../src/model.js";
import {
  escapeHtml,
  renderErrorBanner,
  renderFleet,
  renderPipelineList,
  renderPlan,
  renderSessionPanel,
  renderTicker,
} from "../src/render.js";

describe("escapeHtml", () => {
  it("neutralizes markup in interpolated values", () => {
    expect(escapeHtml(`<img src=x onerror="pwn()">'`)).toBe(
      "&lt;img src=x onerror=&quot;pwn()&quot;&gt;&#39;",
    );
  });
});

describe("renderFleet", () => {
  const cards = fleetCards([
    {
      id: "p-virtex",
      ham: "fpga-card",
      accept_tag: "fpga.xilinx.virtex.revb",
      backend_kind: "simulated-fpga",
      capacity: { luts: 100 },
      occupancy: { luts: 60 },
      deployments: 1,
      reconfigurations: 2,
    },
  ]);

  it("renders the exact occupancy ratio and a matching bar width", () => {
    const html = renderFleet(cards);
    expect(html).toContain('data-ratio="0.6"');
    expect(html).toContain("luts 60/100 (60%)");
    expect(html).toContain("width:60%");
    expect(html).toContain("reconfigurations 2");
  });

  it("escapes identifiers", () => {
    const html = renderFleet(
      fleetCards([
        {
          id: "<b>p</b>",
          ham: "h",
          accept_tag: "cpu",
          backend_kind: "host-executor",
          capacity: {},
          occupancy: {},
          deployments: 0,
          reconfigurations: 0,
        },
      ]),
    );
    expect(html).not.toContain("<b>p</b>");
    expect(html).toContain("&lt;b&gt;p&lt;/b&gt;");
  });

  it("explains an empty fleet", () => {
    expect(renderFleet([])).toContain("Load a hardware manifest");
  });
});

describe("renderPipelineList", () => {
  it("marks the selection and shows validation badges", () => {
    const html = renderPipelineList(
      [
        { id: "demo", badge: "ok", violations: [] },
        { id: "broken", badge: "invalid", violations: [] },
      ],
      "demo",
    );
    expect(html).toContain('data-pipeline="demo"');
    expect(html).toMatch(/pipeline-pick selected[^>]*data-pipeline="demo"/);
    expect(html).toContain('badge-invalid">invalid');
  });
});

describe("renderPlan", () => {
  it("renders assignments as a table", () => {
    const html = renderPlan(
      planView({
        status: "complete",
        mode: "greedy",
        assignments: { addc: { implementation: "addc-x86", processor: "p-host-a" } },
      }),
    );
    expect(html).toContain("plan-complete");
    expect(html).toContain("<td>addc</td>");
    expect(html).toContain("<td>addc-x86</td>");
    expect(html).toContain("<td>p-host-a</td>");
  });

  it("renders every rejection with its reason", () => {
    const html = renderPlan(
      planView({
        status: "infeasible",
        mode: "greedy",
        assignments: {},
        report: {
          rejections: [
            { shell: "filt", implementation: "filt-xcv100", processor: "p-virtex", reason: "incompatible" },
            { shell: "filt", implementation: "filt-xcv100", processor: "", reason: "incompatible" },
          ],
        },
      }),
    );
    expect(html).toContain("plan-infeasible");
    expect(html).toContain("<td>p-virtex</td>");
    expect(html).toContain('class="reason">incompatible');
    expect(html).toContain("—"); // empty-fleet row keeps a visible placeholder
  });

  it("prompts before any plan exists", () => {
    expect(renderPlan(null)).toContain("press Plan");
  });
});

describe("renderSessionPanel", () => {
  const info: SessionInfo = {
    session: "s1",
    state: "stopped",
    pipeline: "demo",
    duration_s: 0.25,
    tokens_per_edge: { "addc.out->scale.in": 3 },
    edge_counters: { "addc.out->scale.in": { produced: 3, consumed: 3 } },
    processed_per_shell: { addc: 3, scale: 3 },
    sinks: { "sink:scale.out": { resource: "collect:", values: [4, 6, 8] } },
    error: null,
  };

  it("shows the transition chain, counters, and sink preview", () => {
    const html = renderSessionPanel(info, ["created", "running", "stopping", "stopped"], sinkPreviews(info));
    expect(html).toContain("created");
    expect(html).toMatch(/created.*running.*stopping.*stopped/s);
    expect(html).toContain("[4, 6, 8]");
    expect(html).toContain("<td>addc</td><td>3</td>");
  });

  it("disables Stop once the session is terminal", () => {
    const html = renderSessionPanel(info, ["stopped"], []);
    expect(html).toMatch(/<button id="stop-session"[^>]*disabled/);
  });

  it("keeps Stop live while running and surfaces failures", () => {
    const running = { ...info, state: "running", error: null };
    expect(renderSessionPanel(running, ["running"], [])).not.toMatch(
      /<button id="stop-session"[^>]*disabled/,
    );
    const failed = { ...info, state: "failed", error: "file: bad line" };
    expect(renderSessionPanel(failed, ["failed"], [])).toContain("error: file: bad line");
  });
});

describe("renderTicker and error banner", () => {
  it("lists event lines", () => {
    const html = renderTicker(["12:00:00 session s1 → running"]);
    expect(html).toContain("session s1 → running");
  });

  it("renders errors dismissibly and escapes them", () => {
    const html = renderErrorBanner('plan_infeasible: no <plan>');
    expect(html).toContain("dismiss-error");
    expect(html).toContain("&lt;plan&gt;");
    expect(renderErrorBanner(null)).toBe("");
  });
});
