import { describe, expect, it } from "vitest";

import { forceLayout, mulberry32, resolveLayout } from "../src/layout.js";

const EDGES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [3, 4], [4, 0], [0, 2],
];

describe("seeded layout", () => {
  it("is deterministic for the same seed", () => {
    expect(forceLayout(5, EDGES, 7)).toEqual(forceLayout(5, EDGES, 7));
  });

  it("differs for different seeds", () => {
    const a = forceLayout(5, EDGES, 7);
    const b = forceLayout(5, EDGES, 8);
    expect(a).not.toEqual(b);
  });

  it("keeps every node inside the unit box", () => {
    for (const p of forceLayout(12, EDGES, 3)) {
      expect(Math.abs(p.x)).toBeLessThanOrEqual(1);
      expect(Math.abs(p.y)).toBeLessThanOrEqual(1);
    }
  });

  it("places connected nodes nearer than the far corners", () => {
    const pts = forceLayout(5, EDGES, 1);
    const d = (a: number, b: number) => Math.hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y);
    expect(d(0, 1)).toBeLessThan(2.0);
  });

  it("prng stream is stable", () => {
    const r = mulberry32(42);
    const seq = [r(), r(), r()];
    const r2 = mulberry32(42);
    expect([r2(), r2(), r2()]).toEqual(seq);
  });
});

describe("resolveLayout", () => {
  it("uses the served layout when complete", () => {
    const served: Record<string, [number, number]> = {
      "0": [0, 0], "1": [0.5, 0.5], "2": [-0.5, 0.5],
    };
    const pts = resolveLayout(3, [[0, 1]], served, 1);
    expect(pts[1]).toEqual({ x: 0.5, y: 0.5 });
  });

  it("falls back to the seeded layout when entries are missing", () => {
    const served: Record<string, [number, number]> = { "0": [0, 0] };
    const pts = resolveLayout(3, [[0, 1]], served, 1);
    expect(pts).toEqual(forceLayout(3, [[0, 1]], 1));
  });
});
