/**
 * Browser wiring: mounts the supervise loop onto the page and drives it
 * with mouse or keyboard (A = authorize, C = cancel, N/Enter = next).
 */

import { Api } from "./api.js";
import { renderAssessment, renderTask, errorBanner, outcomeText, formatNumber } from "./render.js";
import { replayFrames } from "./replay.js";
import { ConsoleState, Event, decisionEnabled, initialState, reduce } from "./state.js";
import { parseTaskRecord } from "./types.js";

export class Console {
  state: ConsoleState = initialState();
  sessionId: string | null = null;
  private seq = 0;

  constructor(
    private api: Api,
    private root: HTMLElement,
    private replayMs = 450,
  ) {}

  dispatch(event: Event): void {
    this.state = reduce(this.state, event);
    this.renderAll();
  }

  async start(): Promise<void> {
    const session = await this.api.createSession();
    this.sessionId = session.session_id;
    await this.nextTask();
  }

  async nextTask(): Promise<void> {
    if (!this.sessionId) return;
    this.dispatch({ kind: "task_requested" });
    try {
      const raw = await this.api.generateTask(this.sessionId);
      const parsed = parseTaskRecord(raw);
      if (!parsed.ok) {
        this.dispatch({ kind: "task_failed", error: parsed.error });
        return;
      }
      this.dispatch({ kind: "task_loaded", task: parsed.value });
      const assessment = await this.api.assess(parsed.value.task_id);
      this.dispatch({ kind: "assessment_loaded", assessment });
    } catch (err) {
      this.dispatch({ kind: "task_failed", error: String(err) });
    }
  }

  async decide(decision: "authorize" | "cancel"): Promise<void> {
    if (!decisionEnabled(this.state) || !this.state.task) return;
    const taskId = this.state.task.task_id;
    const key = `${taskId}-${this.seq++}`;
    this.dispatch({ kind: "decision_submitted", decision });
    try {
      const res = await this.api.decide(taskId, decision, `decision-${key}`);
      let outcome = res.outcome;
      let score = res.session_score ?? null;
      if (decision === "authorize") {
        const exec = await this.api.execute(taskId, `execute-${key}`);
        outcome = exec.outcome;
        score = exec.session_score;
      }
      if (!outcome) throw new Error("service returned no outcome");
      this.dispatch({ kind: "outcome_received", outcome, sessionScore: score });
      await this.reveal();
    } catch (err) {
      this.dispatch({ kind: "task_failed", error: String(err) });
    }
  }

  private async reveal(): Promise<void> {
    const { outcome, task } = this.state;
    if (outcome && task && outcome.executed) {
      const frames = replayFrames(outcome, task.doc.task.goal);
      for (const frame of frames) {
        const view = renderTask(task, frame.adt, frame.mg);
        this.mount("#graph", view.svg);
        await sleep(this.replayMs);
      }
    }
    this.dispatch({ kind: "reveal_finished" });
  }

  bindKeyboard(target: Document): void {
    target.addEventListener("keydown", (ev) => {
      const key = (ev as KeyboardEvent).key.toLowerCase();
      if (key === "a") void this.decide("authorize");
      else if (key === "c") void this.decide("cancel");
      else if (key === "n" || key === "enter") {
        if (this.state.phase === "resolved" || this.state.phase === "error") void this.nextTask();
      }
    });
  }

  private mount(selector: string, html: string): void {
    const el = this.root.querySelector(selector);
    if (el) el.innerHTML = html;
  }

  renderAll(): void {
    const s = this.state;
    if (s.error) {
      this.mount("#graph", errorBanner(s.error));
    } else if (s.task) {
      this.mount("#graph", renderTask(s.task).svg);
    } else {
      this.mount("#graph", '<div class="notice">loading task…</div>');
    }
    this.mount(
      "#assessment",
      s.assessment ? renderAssessment(s.assessment) : '<div class="notice">assessing…</div>',
    );
    const enabled = decisionEnabled(s);
    for (const id of ["#authorize", "#cancel"]) {
      const btn = this.root.querySelector(id) as HTMLButtonElement | null;
      if (btn) btn.disabled = !enabled;
    }
    this.mount("#score", `score: <strong>${formatNumber(s.score)}</strong>`);
    this.mount(
      "#outcome",
      s.outcome ? `<div class="outcome ${s.outcome.kind}">${outcomeText(s.outcome)}</div>` : "",
    );
    this.mount(
      "#history",
      s.history
        .map(
          (h) =>
            `<li>${h.taskId.slice(0, 9)}… ${h.decision} → ${h.outcome} (${h.delta >= 0 ? "+" : ""}${formatNumber(h.delta)})</li>`,
        )
        .join(""),
    );
    const next = this.root.querySelector("#next") as HTMLButtonElement | null;
    if (next) next.disabled = !(s.phase === "resolved" || s.phase === "error");
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

declare global {
  interface Window {
    supervisorConsole?: Console;
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const base = (window as unknown as { SERVICE_BASE?: string }).SERVICE_BASE ?? "http://127.0.0.1:8700";
  const console_ = new Console(new Api(base), root);
  window.supervisorConsole = console_;
  console_.bindKeyboard(document);
  root.querySelector("#authorize")?.addEventListener("click", () => void console_.decide("authorize"));
  root.querySelector("#cancel")?.addEventListener("click", () => void console_.decide("cancel"));
  root.querySelector("#next")?.addEventListener("click", () => void console_.nextTask());
  void console_.start();
}

// module scripts run after the document is parsed; in test runners there
// is no DOM, so this stays inert there
if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
