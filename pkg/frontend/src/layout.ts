/** Deterministic seeded force layout for networks served without one. */

export interface Point {
  x: number;
  y: number;
}

/** mulberry32: tiny seedable PRNG, stable across platforms. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Fruchterman-Reingold style iteration with a fixed step schedule.
 * Same (n, edges, seed) always yields the same picture.
 */
export function forceLayout(
  n: number,
  edges: [number, number][],
  seed = 1,
  iterations = 150,
): Point[] {
  const rand = mulberry32(seed);
  const pos: Point[] = Array.from({ length: n }, () => ({
    x: rand() * 2 - 1,
    y: rand() * 2 - 1,
  }));
  if (n === 1) return [{ x: 0, y: 0 }];
  const k = Math.sqrt(4.0 / n); // ideal spring length in a 2x2 box
  for (let it = 0; it < iterations; it++) {
    const temp = 0.1 * (1 - it / iterations) + 0.005;
    const disp: Point[] = Array.from({ length: n }, () => ({ x: 0, y: 0 }));
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = pos[i].x - pos[j].x;
        let dy = pos[i].y - pos[j].y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-9) {
          dx = 1e-3 * (((i * 31 + j) % 7) - 3);
          dy = 1e-3 * (((i * 17 + j) % 5) - 2);
          d2 = dx * dx + dy * dy;
        }
        const d = Math.sqrt(d2);
        const rep = (k * k) / d;
        disp[i].x += (dx / d) * rep;
        disp[i].y += (dy / d) * rep;
        disp[j].x -= (dx / d) * rep;
        disp[j].y -= (dy / d) * rep;
      }
    }
    for (const [a, b] of edges) {
      const dx = pos[a].x - pos[b].x;
      const dy = pos[a].y - pos[b].y;
      const d = Math.sqrt(dx * dx + dy * dy) || 1e-6;
      const att = (d * d) / k;
      disp[a].x -= (dx / d) * att;
      disp[a].y -= (dy / d) * att;
      disp[b].x += (dx / d) * att;
      disp[b].y += (dy / d) * att;
    }
    for (let i = 0; i < n; i++) {
      const d = Math.sqrt(disp[i].x ** 2 + disp[i].y ** 2) || 1e-9;
      const step = Math.min(d, temp);
      pos[i].x += (disp[i].x / d) * step;
      pos[i].y += (disp[i].y / d) * step;
      pos[i].x = Math.max(-1, Math.min(1, pos[i].x));
      pos[i].y = Math.max(-1, Math.min(1, pos[i].y));
    }
  }
  return pos.map((p) => ({ x: round6(p.x), y: round6(p.y) }));
}

function round6(v: number): number {
  return Math.round(v * 1e6) / 1e6;
}

/** Use the served layout when present, else compute a seeded one. */
export function resolveLayout(
  n: number,
  edges: [number, number][],
  served: Record<string, [number, number]> | undefined,
  seed: number,
): Point[] {
  if (served) {
    const pts: Point[] = [];
    for (let i = 0; i < n; i++) {
      const entry = served[String(i)];
      if (!entry) return forceLayout(n, edges, seed);
      pts.push({ x: entry[0], y: entry[1] });
    }
    return pts;
  }
  return forceLayout(n, edges, seed);
}
