import { describe, expect, it } from "vitest";

import { errorBanner, renderAssessment, renderGauge, renderHistogram, renderTask } from "../src/render.js";
import { parseTaskRecord } from "../src/types.js";
import type { Assessment, SummaryPayload, TaskRecord } from "../src/types.js";

function record13(): TaskRecord {
  const edges: [number, number][] = [];
  for (let i = 0; i < 12; i++) edges.push([i, i + 1]);
  return {
    task_id: "t13",
    seed: 5,
    state: "generated",
    session_id: null,
    doc: {
      schema_version: 1,
      network: { n: 13, edges, generator: "manual" },
      task: {
        adt_start: 0,
        mg_start: 6,
        goal: 12,
        p_trans: 0.7,
        rewards: { goal: 2000, caught: -2000, loiter: -200 },
        gamma: 0.95,
        t_max: 50,
        mg_pursue_prob: 0.7,
      },
      seed: 5,
    },
  };
}

const summary: SummaryPayload = {
  mean: 100, std: 10, stderr: 1, min: 0, max: 200, n: 100,
  bin_edges: [0, 50, 100, 150, 200], counts: [10, 20, 40, 30], flags: [],
};

describe("graph rendering", () => {
  it("renders 13 nodes with the three role markers", () => {
    const view = renderTask(record13());
    expect(view.svg.match(/data-node=/g)).toHaveLength(13);
    expect(view.svg).toContain('data-marker="adt"');
    expect(view.svg).toContain('data-marker="mg"');
    expect(view.svg).toContain("#26a96c"); // goal green
    expect(view.svg).toContain("#e6c229"); // truck yellow
    expect(view.svg).toContain("#d1495b"); // pursuer red
  });

  it("uses a deterministic layout when the payload has none", () => {
    const a = renderTask(record13());
    const b = renderTask(record13());
    expect(a.svg).toBe(b.svg);
    expect(a.points).toEqual(b.points);
  });

  it("prefers the served layout", () => {
    const rec = record13();
    const layout: Record<string, [number, number]> = {};
    for (let i = 0; i < 13; i++) layout[String(i)] = [i / 13, 0];
    rec.doc.network.layout = layout;
    const view = renderTask(rec);
    expect(view.points[3]).toEqual({ x: 3 / 13, y: 0 });
  });

  it("malformed payloads become an error banner, not a crash", () => {
    const parsed = parseTaskRecord({ task_id: "x", doc: { network: { n: "nope" } } });
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) {
      const html = errorBanner(parsed.error);
      expect(html).toContain("error-banner");
      expect(html).toContain("malformed network");
    }
  });

  it("escapes markup in error text", () => {
    expect(errorBanner("<script>alert(1)</script>")).not.toContain("<script>");
  });
});

describe("gauges", () => {
  it("renders the payload value verbatim", () => {
    const html = renderGauge("gauge-xo", -0.513, -1, 1, "unlikely");
    expect(html).toContain('data-value="-0.513"');
    expect(html).toContain("-0.513");
    expect(html).toContain("unlikely");
  });

  it("pins the left extreme at the left edge", () => {
    const html = renderGauge("gauge-xo", -1, -1, 1, "very unlikely");
    expect(html).toContain("left:0.00%");
  });

  it("centers the parity value of the solver gauge", () => {
    const html = renderGauge("gauge-xs", 1.0, 0, 2, "on par with the trusted solver", 1);
    expect(html).toContain('gauge-needle" style="left:50.00%"');
    expect(html).toContain('gauge-center" style="left:50.00%"');
  });
});

describe("assessment panel", () => {
  const base: Assessment = {
    task_id: "t13",
    state: "assessed",
    x_o: { z_star: 0, alpha: 1, k: 1, upm: 1, lpm: 1, ratio: 1, x_o: 0.25, n: 100, flags: [] },
    x_o_label: "likely to meet the standard",
    x_s: null,
    x_s_label: null,
    candidate_summary: summary,
    trusted_summary: null,
    success_probability: 0.6,
  };

  it("shows a notice when solver quality is unavailable", () => {
    const html = renderAssessment(base);
    expect(html).toContain("xs-missing");
    expect(html).toContain("gauge-xo");
    expect(html).not.toContain("gauge-xs");
  });

  it("renders both gauges when solver quality is present", () => {
    const withXs: Assessment = {
      ...base,
      x_s: {
        mu_c: 0, sigma_c: 1, mu_t: 0, sigma_t: 1, r_low: -1, r_high: 1,
        kappa: 0.5, squash_gain: 5, h2: 0, delta_mu: 0,
        delta_mu_convention: "candidate_minus_trusted", f: 0, m_s: 0, x_s: 1.0, flags: [],
      },
      x_s_label: "on par with the trusted solver",
    };
    const html = renderAssessment(withXs);
    expect(html).toContain("gauge-xs");
    expect(html).toContain('data-value="1"');
  });

  it("histogram draws one bar per bin", () => {
    const html = renderHistogram(summary);
    expect(html.match(/data-bin=/g)).toHaveLength(4);
    expect(html).toContain("n=100");
  });
});
