/** Payload shapes served by the assessment service (v1). */

export interface NetworkDoc {
  n: number;
  edges: [number, number][];
  generator: string;
  layout?: Record<string, [number, number]>;
}

export interface TaskBody {
  adt_start: number;
  mg_start: number;
  goal: number;
  p_trans: number;
  rewards: { goal: number; caught: number; loiter: number };
  gamma: number;
  t_max: number;
  mg_pursue_prob: number;
}

export interface TaskDoc {
  schema_version: number;
  network: NetworkDoc;
  task: TaskBody;
  seed: number;
}

export interface TaskRecord {
  task_id: string;
  seed: number;
  state: string;
  session_id: string | null;
  doc: TaskDoc;
  decision?: string | null;
}

export interface OutcomePayload {
  z_star: number;
  alpha: number;
  k: number;
  upm: number;
  lpm: number;
  ratio: number | null;
  x_o: number;
  n: number;
  flags: string[];
}

export interface SolverQualityPayload {
  mu_c: number;
  sigma_c: number;
  mu_t: number;
  sigma_t: number;
  r_low: number;
  r_high: number;
  kappa: number;
  squash_gain: number;
  h2: number;
  delta_mu: number;
  delta_mu_convention: string;
  f: number;
  m_s: number;
  x_s: number;
  flags: string[];
}

export interface SummaryPayload {
  mean: number;
  std: number;
  stderr: number;
  min: number;
  max: number;
  n: number;
  bin_edges: number[];
  counts: number[];
  flags: string[];
}

export interface Assessment {
  task_id: string;
  state: string;
  x_o: OutcomePayload;
  x_o_label: string;
  x_s: SolverQualityPayload | null;
  x_s_label: string | null;
  candidate_summary: SummaryPayload;
  trusted_summary: Record<string, unknown> | null;
  success_probability: number;
}

export interface TraceStep {
  adt: number;
  mg: number;
  action: number;
  reward: number;
}

export interface Outcome {
  kind: string; // delivered | caught | timeout | canceled
  executed: boolean;
  reward: number | null;
  trace: TraceStep[];
  start?: { adt: number; mg: number; goal: number };
  score_delta: number;
}

export interface DecisionResponse {
  task_id: string;
  decision: string;
  state: string;
  outcome?: Outcome;
  session_score?: number;
}

export interface ExecuteResponse {
  task_id: string;
  state: string;
  outcome: Outcome;
  session_score: number | null;
}

export interface HistoryEntry {
  task_id: string;
  decision: string;
  x_o: number | null;
  x_s: number | null;
  outcome: string;
  score_delta: number;
}

export interface SessionSnapshot {
  session_id: string;
  score: number;
  history: HistoryEntry[];
  scoring: Record<string, number>;
}

/** Narrow an unknown server payload into a TaskRecord, or explain why not. */
export function parseTaskRecord(raw: unknown): { ok: true; value: TaskRecord } | { ok: false; error: string } {
  if (typeof raw !== "object" || raw === null) return { ok: false, error: "payload is not an object" };
  const rec = raw as Record<string, unknown>;
  if (typeof rec.task_id !== "string") return { ok: false, error: "missing task_id" };
  const doc = rec.doc as TaskDoc | undefined;
  if (!doc || typeof doc !== "object") return { ok: false, error: "missing task doc" };
  const net = doc.network;
  if (!net || typeof net.n !== "number" || !Array.isArray(net.edges)) {
    return { ok: false, error: "malformed network" };
  }
  for (const e of net.edges) {
    if (!Array.isArray(e) || e.length !== 2) return { ok: false, error: "malformed edge list" };
  }
  if (!doc.task || typeof doc.task.adt_start !== "number") {
    return { ok: false, error: "malformed task body" };
  }
  return { ok: true, value: rec as unknown as TaskRecord };
}
