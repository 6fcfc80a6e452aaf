/** Thin fetch client for the assessment service. */

import type {
  Assessment,
  DecisionResponse,
  ExecuteResponse,
  SessionSnapshot,
  TaskDoc,
  TaskRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(
  base: string,
  path: string,
  init?: RequestInit & { idempotencyKey?: string },
): Promise<T> {
  const headers: Record<string, string> = { "content-type": "application/json" };
  if (init?.idempotencyKey) headers["Idempotency-Key"] = init.idempotencyKey;
  const res = await fetch(base + path, { ...init, headers });
  const body = await res.text();
  if (!res.ok) {
    let detail = body;
    try {
      detail = JSON.parse(body).detail ?? body;
    } catch {
      /* plain text error */
    }
    throw new ApiError(res.status, `${res.status}: ${detail}`);
  }
  return JSON.parse(body) as T;
}

export class Api {
  constructor(public base: string) {}

  createSession(): Promise<SessionSnapshot> {
    return request(this.base, "/v1/sessions", { method: "POST", body: JSON.stringify({}) });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return request(this.base, `/v1/sessions/${sessionId}`);
  }

  generateTask(sessionId: string, seed?: number): Promise<TaskRecord> {
    return request(this.base, "/v1/tasks/generate", {
      method: "POST",
      body: JSON.stringify({ session_id: sessionId, seed }),
    });
  }

  importTask(sessionId: string, doc: TaskDoc): Promise<TaskRecord> {
    return request(this.base, "/v1/tasks/import", {
      method: "POST",
      body: JSON.stringify({ session_id: sessionId, doc }),
    });
  }

  assess(taskId: string, runs?: number): Promise<Assessment> {
    return request(this.base, `/v1/tasks/${taskId}/assess`, {
      method: "POST",
      body: JSON.stringify(runs === undefined ? {} : { runs }),
    });
  }

  decide(taskId: string, decision: "authorize" | "cancel", idempotencyKey: string): Promise<DecisionResponse> {
    return request(this.base, `/v1/tasks/${taskId}/decision`, {
      method: "POST",
      body: JSON.stringify({ decision }),
      idempotencyKey,
    });
  }

  execute(taskId: string, idempotencyKey: string): Promise<ExecuteResponse> {
    return request(this.base, `/v1/tasks/${taskId}/execute`, {
      method: "POST",
      body: JSON.stringify({}),
      idempotencyKey,
    });
  }
}
