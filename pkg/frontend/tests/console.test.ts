import { describe, expect, it } from "vitest";

import type { Api } from "../src/api.js";
import { Console } from "../src/main.js";
import type { Assessment, TaskRecord } from "../src/types.js";

function fixtureRecord(): TaskRecord {
  return {
    task_id: "t-e2e",
    seed: 9,
    state: "generated",
    session_id: "s1",
    doc: {
      schema_version: 1,
      network: { n: 4, edges: [[0, 1], [1, 2], [2, 3]], generator: "manual" },
      task: {
        adt_start: 0, mg_start: 3, goal: 2, p_trans: 1,
        rewards: { goal: 2000, caught: -2000, loiter: -200 },
        gamma: 0.95, t_max: 50, mg_pursue_prob: 0.7,
      },
      seed: 9,
    },
  };
}

const assessment = {
  task_id: "t-e2e",
  state: "assessed",
  x_o: { z_star: 0, alpha: 1, k: 1, upm: 1800, lpm: 0, ratio: null, x_o: 1.0, n: 40, flags: [] },
  x_o_label: "very likely to meet the standard",
  x_s: null,
  x_s_label: null,
  candidate_summary: {
    mean: 1800, std: 0, stderr: 0, min: 1800, max: 1800, n: 40,
    bin_edges: [1799.5, 1800.5], counts: [40], flags: ["degenerate"],
  },
  trusted_summary: null,
  success_probability: 1.0,
} as unknown as Assessment;

/** Fake transport: records calls, returns canned payloads. */
function fakeApi(calls: string[]): Api {
  return {
    base: "fake",
    createSession: async () => {
      calls.push("createSession");
      return { session_id: "s1", score: 0, history: [], scoring: {} };
    },
    getSession: async () => ({ session_id: "s1", score: 1, history: [], scoring: {} }),
    generateTask: async () => {
      calls.push("generateTask");
      return fixtureRecord();
    },
    importTask: async () => fixtureRecord(),
    assess: async () => {
      calls.push("assess");
      return assessment;
    },
    decide: async (_id: string, decision: string) => {
      calls.push(`decide:${decision}`);
      return { task_id: "t-e2e", decision, state: "decided" };
    },
    execute: async () => {
      calls.push("execute");
      return {
        task_id: "t-e2e",
        state: "executed",
        outcome: {
          kind: "delivered",
          executed: true,
          reward: 1800,
          trace: [
            { adt: 0, mg: 3, action: 1, reward: -200 },
            { adt: 1, mg: 3, action: 2, reward: 2000 },
          ],
          score_delta: 1.0,
        },
        session_score: 1.0,
      };
    },
  } as unknown as Api;
}

/** Bare-bones element standing in for the mount points. */
function fakeRoot() {
  const nodes = new Map<string, { innerHTML: string; disabled: boolean }>();
  for (const id of ["#graph", "#assessment", "#score", "#outcome", "#history", "#authorize", "#cancel", "#next"]) {
    nodes.set(id, { innerHTML: "", disabled: false });
  }
  return {
    nodes,
    querySelector(sel: string) {
      return nodes.get(sel) ?? null;
    },
  };
}

describe("console controller", () => {
  it("drives the whole supervise loop and keeps the score current", async () => {
    const calls: string[] = [];
    const root = fakeRoot();
    const console_ = new Console(fakeApi(calls), root as unknown as HTMLElement, 1);

    await console_.start();
    expect(calls).toEqual(["createSession", "generateTask", "assess"]);
    expect(console_.state.phase).toBe("awaiting_decision");
    expect(root.nodes.get("#authorize")!.disabled).toBe(false);
    expect(root.nodes.get("#assessment")!.innerHTML).toContain('data-value="1"');
    expect(root.nodes.get("#graph")!.innerHTML).toContain('data-marker="adt"');

    await console_.decide("authorize");
    expect(calls.slice(3)).toEqual(["decide:authorize", "execute"]);
    expect(console_.state.phase).toBe("resolved");
    expect(console_.state.score).toBe(1.0);
    expect(root.nodes.get("#score")!.innerHTML).toContain("1");
    expect(root.nodes.get("#outcome")!.innerHTML).toContain("Delivered");
    expect(root.nodes.get("#history")!.innerHTML).toContain("delivered");
    expect(root.nodes.get("#next")!.disabled).toBe(false);
    expect(root.nodes.get("#authorize")!.disabled).toBe(true);

    // a second decide on the same task is a no-op
    await console_.decide("cancel");
    expect(calls.filter((c) => c.startsWith("decide"))).toHaveLength(1);
  });

  it("keyboard bindings forward to the decision handlers", async () => {
    const calls: string[] = [];
    const root = fakeRoot();
    const console_ = new Console(fakeApi(calls), root as unknown as HTMLElement, 1);
    await console_.start();

    let listener: ((ev: { key: string }) => void) | null = null;
    const fakeDoc = {
      addEventListener: (_type: string, fn: (ev: { key: string }) => void) => {
        listener = fn;
      },
    };
    console_.bindKeyboard(fakeDoc as unknown as Document);
    expect(listener).not.toBeNull();
    listener!({ key: "A" });
    await new Promise((r) => setTimeout(r, 20));
    expect(calls).toContain("decide:authorize");
  });

  it("surfaces malformed payloads as an error banner", async () => {
    const calls: string[] = [];
    const api = fakeApi(calls);
    (api as unknown as { generateTask: () => Promise<unknown> }).generateTask = async () => ({
      task_id: "bad",
      doc: { network: { n: "x" } },
    });
    const root = fakeRoot();
    const console_ = new Console(api, root as unknown as HTMLElement, 1);
    await console_.start();
    expect(console_.state.phase).toBe("error");
    expect(root.nodes.get("#graph")!.innerHTML).toContain("error-banner");
  });
});
