/**
 * Console state machine for the supervise loop.
 *
 * One task is active at a time.  Decision controls stay disabled until
 * the assessment is loaded, and exactly one decision is accepted per
 * task; repeat submissions are ignored (the transport additionally sends
 * an idempotency key).
 */

import type { Assessment, Outcome, TaskRecord } from "./types.js";

export type Phase =
  | "idle"
  | "loading_task"
  | "assessing"
  | "awaiting_decision"
  | "submitting"
  | "revealing"
  | "resolved"
  | "error";

export interface ConsoleState {
  phase: Phase;
  task: TaskRecord | null;
  assessment: Assessment | null;
  decision: "authorize" | "cancel" | null;
  outcome: Outcome | null;
  score: number;
  history: { taskId: string; decision: string; outcome: string; delta: number }[];
  error: string | null;
}

export function initialState(): ConsoleState {
  return {
    phase: "idle",
    task: null,
    assessment: null,
    decision: null,
    outcome: null,
    score: 0,
    history: [],
    error: null,
  };
}

export function decisionEnabled(state: ConsoleState): boolean {
  return state.phase === "awaiting_decision" && state.assessment !== null && state.decision === null;
}

export type Event =
  | { kind: "task_requested" }
  | { kind: "task_loaded"; task: TaskRecord }
  | { kind: "task_failed"; error: string }
  | { kind: "assessment_loaded"; assessment: Assessment }
  | { kind: "assessment_failed"; error: string }
  | { kind: "decision_submitted"; decision: "authorize" | "cancel" }
  | { kind: "outcome_received"; outcome: Outcome; sessionScore: number | null }
  | { kind: "reveal_finished" }
  | { kind: "next_task" };

export function reduce(state: ConsoleState, event: Event): ConsoleState {
  switch (event.kind) {
    case "task_requested":
      return { ...initialState(), score: state.score, history: state.history, phase: "loading_task" };
    case "task_loaded":
      if (state.phase !== "loading_task") return state;
      return { ...state, phase: "assessing", task: event.task, error: null };
    case "task_failed":
      return { ...state, phase: "error", error: event.error };
    case "assessment_loaded":
      if (state.phase !== "assessing") return state;
      return { ...state, phase: "awaiting_decision", assessment: event.assessment };
    case "assessment_failed":
      return { ...state, phase: "error", error: event.error };
    case "decision_submitted":
      if (!decisionEnabled(state)) return state; // one decision per task
      return { ...state, phase: "submitting", decision: event.decision };
    case "outcome_received": {
      if (state.phase !== "submitting") return state;
      const outcome = event.outcome;
      const history = state.history.concat({
        taskId: state.task?.task_id ?? "?",
        decision: state.decision ?? "?",
        outcome: outcome.kind,
        delta: outcome.score_delta,
      });
      const score = event.sessionScore ?? state.score + outcome.score_delta;
      return { ...state, phase: "revealing", outcome, history, score };
    }
    case "reveal_finished":
      if (state.phase !== "revealing") return state;
      return { ...state, phase: "resolved" };
    case "next_task":
      if (state.phase !== "resolved" && state.phase !== "error" && state.phase !== "idle") return state;
      return { ...initialState(), score: state.score, history: state.history, phase: "loading_task" };
    default:
      return state;
  }
}
