/** Step-by-step trace replay frames from an execute response. */

import type { Outcome } from "./types.js";

export interface Frame {
  index: number;
  adt: number;
  mg: number;
  note: string;
}

/**
 * The trace records the state each action was taken FROM; the final
 * frame shows where the run ended (goal node when delivered, shared node
 * when caught).
 */
export function replayFrames(outcome: Outcome, goal: number): Frame[] {
  const frames: Frame[] = [];
  if (!outcome.executed || outcome.trace.length === 0) {
    return frames;
  }
  outcome.trace.forEach((step, i) => {
    frames.push({ index: i, adt: step.adt, mg: step.mg, note: `step ${i}` });
  });
  const last = outcome.trace[outcome.trace.length - 1];
  if (outcome.kind === "delivered") {
    // the goal node is the one position the collapse preserves
    frames.push({ index: outcome.trace.length, adt: goal, mg: last.mg, note: "delivered" });
  } else {
    // capture collapses the joint state, so the meeting node is not in
    // the payload; the closing frame keeps the last known positions and
    // lets the banner tell the story
    frames.push({ index: outcome.trace.length, adt: last.adt, mg: last.mg, note: outcome.kind });
  }
  return frames;
}
