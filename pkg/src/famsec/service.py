"""HTTP backend for the supervisor loop.

Exposes task generation, competency assessment, authorize/cancel
decisions, simulated execution, and session scoring over JSON.  Session
state is an append-only JSONL event log; a restart replays the log into
the exact same snapshots.  Execution uses seeds disjoint from assessment
seeds, so a run can never "peek" at the episode it will be scored on.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Header, HTTPException
from pydantic import BaseModel

from . import delivery, reports, surrogate
from .delivery import build_mdp, sample_task, task_from_doc, task_to_doc
from .mdp import MctsConfig, MctsPolicy, TabularPolicy, value_iteration
from .outcome import OutcomeStandard, assess_outcomes
from .rollouts import monte_carlo, simulate_episode, summarize
from .seeding import mix64
from .solverq import SolverQualityConfig, gaussian_from_samples, x_s_from_samples

X_O_LABELS = (
    "very unlikely to meet the standard",
    "unlikely to meet the standard",
    "about as likely as not to meet the standard",
    "likely to meet the standard",
    "very likely to meet the standard",
)
X_S_LABELS = (
    "much less capable than the trusted solver",
    "less capable than the trusted solver",
    "on par with the trusted solver",
    "more capable than the trusted solver",
    "much more capable than the trusted solver",
)


def x_o_label(x: float) -> str:
    idx = int((x + 1.0) / 0.4)
    return X_O_LABELS[min(max(idx, 0), 4)]


def x_s_label(x: float) -> str:
    idx = int(x / 0.4)
    return X_S_LABELS[min(max(idx, 0), 4)]


@dataclass
class ScoringConfig:
    reward_success: float = 1.0
    penalty_approved_capture: float = 2.0
    penalty_cancel: float = 0.25
    timeout_delta: float = 0.0


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8700
    state_dir: str | None = None
    surrogate_model_path: str | None = None
    default_runs: int = 200
    candidate: str = "mcts:d=3,its=100,e=1000"
    n_range: tuple[int, int] = (8, 35)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)

    @classmethod
    def load(cls, path: str | None = None) -> "ServiceConfig":
        """Config file first, then FAMSEC_* environment overrides."""
        cfg = cls()
        if path:
            doc = json.loads(Path(path).read_text())
            for key in ("host", "port", "state_dir", "surrogate_model_path", "default_runs", "candidate"):
                if key in doc:
                    setattr(cfg, key, doc[key])
            if "n_range" in doc:
                cfg.n_range = tuple(doc["n_range"])
            if "scoring" in doc:
                cfg.scoring = ScoringConfig(**doc["scoring"])
        env = os.environ
        cfg.host = env.get("FAMSEC_HOST", cfg.host)
        cfg.port = int(env.get("FAMSEC_PORT", cfg.port))
        cfg.state_dir = env.get("FAMSEC_STATE_DIR", cfg.state_dir)
        cfg.surrogate_model_path = env.get("FAMSEC_MODEL_PATH", cfg.surrogate_model_path)
        cfg.default_runs = int(env.get("FAMSEC_DEFAULT_RUNS", cfg.default_runs))
        for attr, var in (
            ("reward_success", "FAMSEC_SCORE_SUCCESS"),
            ("penalty_approved_capture", "FAMSEC_SCORE_CAPTURE"),
            ("penalty_cancel", "FAMSEC_SCORE_CANCEL"),
            ("timeout_delta", "FAMSEC_SCORE_TIMEOUT"),
        ):
            if var in env:
                setattr(cfg.scoring, attr, float(env[var]))
        return cfg


class GenerateRequest(BaseModel):
    seed: int | None = None
    n_range: tuple[int, int] | None = None
    p_trans_range: tuple[float, float] | None = None
    session_id: str | None = None


class ImportRequest(BaseModel):
    doc: dict
    session_id: str | None = None


class AssessRequest(BaseModel):
    zstar: float = 0.0
    alpha: int = 1
    k: float = 1.0
    runs: int | None = None
    trusted: str | None = None
    candidate: str | None = None
    seed: int | None = None


class DecisionRequest(BaseModel):
    decision: str


class SessionRequest(BaseModel):
    scoring: dict | None = None


@dataclass
class TaskRecord:
    task_id: str
    seed: int
    doc: dict
    session_id: str | None
    state: str = "generated"  # generated -> assessed -> decided -> executed
    assessment: dict | None = None
    assess_params: dict | None = None
    decision: str | None = None
    outcome: dict | None = None


@dataclass
class Session:
    session_id: str
    scoring: ScoringConfig
    score: float = 0.0
    history: list[dict] = field(default_factory=list)

    def snapshot(self) -> dict:
        return {
            "session_id": self.session_id,
            "score": self.score,
            "history": list(self.history),
            "scoring": asdict(self.scoring),
        }


class EventStore:
    """Append-only JSONL log; replaying it rebuilds all state."""

    def __init__(self, state_dir: str | None):
        self.path = Path(state_dir) / "events.jsonl" if state_dir else None
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, event: dict) -> None:
        if self.path:
            with open(self.path, "a") as fh:
                fh.write(json.dumps(event) + "\n")

    def replay(self):
        if not self.path or not self.path.exists():
            return
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.sessions: dict[str, Session] = {}
        self.tasks: dict[str, TaskRecord] = {}
        self.idempotency: dict[str, Any] = {}
        self.counter = 0
        self.store = EventStore(config.state_dir)
        self.model = None
        if config.surrogate_model_path:
            self.model = surrogate.load_model(config.surrogate_model_path)
        for event in self.store.replay():
            self.apply(event, record=False)

    # -- event application (used both live and during replay) ----------

    def apply(self, event: dict, record: bool = True) -> None:
        kind = event["type"]
        if kind == "session_created":
            self.sessions[event["session_id"]] = Session(
                session_id=event["session_id"],
                scoring=ScoringConfig(**event["scoring"]),
            )
        elif kind == "task_generated":
            self.tasks[event["task_id"]] = TaskRecord(
                task_id=event["task_id"],
                seed=event["seed"],
                doc=event["doc"],
                session_id=event.get("session_id"),
            )
            self.counter = max(self.counter, event.get("counter", 0))
        elif kind == "task_assessed":
            rec = self.tasks[event["task_id"]]
            rec.assessment = event["assessment"]
            rec.assess_params = event["params"]
            rec.state = "assessed"
        elif kind == "task_decided":
            rec = self.tasks[event["task_id"]]
            rec.decision = event["decision"]
            rec.state = "decided"
        elif kind == "task_executed":
            rec = self.tasks[event["task_id"]]
            rec.outcome = event["outcome"]
            rec.state = "executed"
            delta = event["outcome"]["score_delta"]
            session = self.sessions.get(rec.session_id or "")
            if session:
                session.score += delta
                session.history.append(
                    {
                        "task_id": rec.task_id,
                        "decision": rec.decision,
                        "x_o": (rec.assessment or {}).get("x_o", {}).get("x_o"),
                        "x_s": ((rec.assessment or {}).get("x_s") or {}).get("x_s"),
                        "outcome": event["outcome"]["kind"],
                        "score_delta": delta,
                    }
                )
        else:
            raise ValueError(f"unknown event type {kind}")
        if record:
            self.store.append(event)


def task_record_payload(rec: TaskRecord) -> dict:
    return {
        "task_id": rec.task_id,
        "seed": rec.seed,
        "state": rec.state,
        "session_id": rec.session_id,
        "doc": rec.doc,
        "decision": rec.decision,
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    state = ServiceState(config)
    app = FastAPI(title="Self-confidence assessment service", version="1.0")
    app.state.service = state

    from fastapi.middleware.cors import CORSMiddleware

    # local tool: the console page is served from another local port
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def idempotent(key: str | None, compute):
        if key is not None and key in state.idempotency:
            return state.idempotency[key]
        result = compute()
        if key is not None:
            state.idempotency[key] = result
        return result

    @app.post("/v1/sessions")
    def create_session(req: SessionRequest | None = None,
                       idempotency_key: str | None = Header(default=None)):
        def compute():
            sid = f"s{len(state.sessions):04d}"
            scoring = asdict(config.scoring)
            if req and req.scoring:
                scoring.update(req.scoring)
            state.apply({"type": "session_created", "session_id": sid, "scoring": scoring})
            return state.sessions[sid].snapshot()

        return idempotent(idempotency_key, compute)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = state.sessions.get(session_id)
        if not session:
            raise HTTPException(404, f"unknown session {session_id}")
        return session.snapshot()

    @app.post("/v1/tasks/generate")
    def generate(req: GenerateRequest, idempotency_key: str | None = Header(default=None)):
        n_range = tuple(req.n_range) if req.n_range else config.n_range
        p_range = tuple(req.p_trans_range) if req.p_trans_range else (0.0, 1.0)
        if not (2 <= n_range[0] <= n_range[1] <= 64):
            raise HTTPException(422, f"n_range {n_range} outside supported bounds")
        if not (0.0 <= p_range[0] <= p_range[1] <= 1.0):
            raise HTTPException(422, f"p_trans_range {p_range} invalid")
        if req.session_id is not None and req.session_id not in state.sessions:
            raise HTTPException(404, f"unknown session {req.session_id}")

        def compute():
            if req.seed is not None:
                seed = req.seed
            else:
                state.counter += 1
                seed = mix64(0x5EED, state.counter)
            task_id = f"t{mix64(seed, n_range[0], n_range[1]):016x}"
            existing = state.tasks.get(task_id)
            if existing:
                return task_record_payload(existing)
            try:
                task = sample_task(seed, n_range=n_range, p_trans_range=p_range)
            except delivery.GenerationFailed as exc:
                raise HTTPException(500, f"generation failed: {exc}") from exc
            state.apply(
                {
                    "type": "task_generated",
                    "task_id": task_id,
                    "seed": seed,
                    "doc": task_to_doc(task, seed),
                    "session_id": req.session_id,
                    "counter": state.counter,
                }
            )
            return task_record_payload(state.tasks[task_id])

        return idempotent(idempotency_key, compute)

    @app.post("/v1/tasks/import")
    def import_task(req: ImportRequest, idempotency_key: str | None = Header(default=None)):
        if req.session_id is not None and req.session_id not in state.sessions:
            raise HTTPException(404, f"unknown session {req.session_id}")

        def compute():
            try:
                task, seed = task_from_doc(req.doc)
            except (delivery.InvalidTask, KeyError, TypeError, ValueError) as exc:
                raise HTTPException(422, f"bad task document: {exc}") from exc
            task_id = f"t{mix64(seed, 0x1019, len(state.tasks)):016x}"
            state.apply(
                {
                    "type": "task_generated",
                    "task_id": task_id,
                    "seed": seed,
                    "doc": task_to_doc(task, seed),
                    "session_id": req.session_id,
                    "counter": state.counter,
                }
            )
            return task_record_payload(state.tasks[task_id])

        return idempotent(idempotency_key, compute)

    @app.get("/v1/tasks/{task_id}")
    def get_task(task_id: str):
        rec = state.tasks.get(task_id)
        if not rec:
            raise HTTPException(404, f"unknown task {task_id}")
        payload = task_record_payload(rec)
        payload["assessment"] = rec.assessment
        payload["outcome"] = rec.outcome
        return payload

    @app.post("/v1/tasks/{task_id}/assess")
    def assess(task_id: str, req: AssessRequest,
               idempotency_key: str | None = Header(default=None)):
        rec = state.tasks.get(task_id)
        if not rec:
            raise HTTPException(404, f"unknown task {task_id}")
        params = {
            "zstar": req.zstar,
            "alpha": req.alpha,
            "k": req.k,
            "runs": req.runs or config.default_runs,
            "trusted": req.trusted or ("surrogate" if state.model else "vi"),
            "candidate": req.candidate or config.candidate,
            "seed": req.seed if req.seed is not None else rec.seed,
        }
        if rec.state != "generated":
            if rec.assessment is not None and rec.assess_params == params:
                return rec.assessment  # idempotent re-read
            raise HTTPException(409, f"task {task_id} is in state {rec.state}")

        def compute():
            assessment = _compute_assessment(state, rec, params)
            state.apply(
                {
                    "type": "task_assessed",
                    "task_id": task_id,
                    "assessment": assessment,
                    "params": params,
                }
            )
            return assessment

        return idempotent(idempotency_key, compute)

    @app.post("/v1/tasks/{task_id}/decision")
    def decide(task_id: str, req: DecisionRequest,
               idempotency_key: str | None = Header(default=None)):
        def compute():
            rec = state.tasks.get(task_id)
            if not rec:
                raise HTTPException(404, f"unknown task {task_id}")
            if req.decision not in ("authorize", "cancel"):
                raise HTTPException(422, f"decision must be authorize or cancel, got {req.decision!r}")
            if rec.state != "assessed":
                raise HTTPException(409, f"task {task_id} is in state {rec.state}; decide exactly once after assessment")
            state.apply({"type": "task_decided", "task_id": task_id, "decision": req.decision})
            payload = {"task_id": task_id, "decision": req.decision, "state": "decided"}
            if req.decision == "cancel":
                scoring = _scoring_for(state, rec)
                outcome = {
                    "kind": "canceled",
                    "executed": False,
                    "reward": None,
                    "trace": [],
                    "score_delta": -scoring.penalty_cancel,
                }
                state.apply({"type": "task_executed", "task_id": task_id, "outcome": outcome})
                payload["outcome"] = outcome
                payload["state"] = "executed"
                payload["session_score"] = _session_score(state, rec)
            return payload

        return idempotent(idempotency_key, compute)

    @app.post("/v1/tasks/{task_id}/execute")
    def execute(task_id: str, idempotency_key: str | None = Header(default=None)):
        def compute():
            rec = state.tasks.get(task_id)
            if not rec:
                raise HTTPException(404, f"unknown task {task_id}")
            if rec.state == "executed":
                raise HTTPException(409, f"task {task_id} already resolved ({rec.outcome['kind']})")
            if rec.state != "decided" or rec.decision != "authorize":
                raise HTTPException(409, f"task {task_id} is not authorized for execution")
            outcome = _execute_episode(state, rec)
            state.apply({"type": "task_executed", "task_id": task_id, "outcome": outcome})
            return {
                "task_id": task_id,
                "state": "executed",
                "outcome": outcome,
                "session_score": _session_score(state, rec),
            }

        return idempotent(idempotency_key, compute)

    @app.get("/v1/spec")
    def spec():
        return app.openapi()

    return app


def _scoring_for(state: ServiceState, rec: TaskRecord) -> ScoringConfig:
    session = state.sessions.get(rec.session_id or "")
    return session.scoring if session else state.config.scoring


def _session_score(state: ServiceState, rec: TaskRecord) -> float | None:
    session = state.sessions.get(rec.session_id or "")
    return session.score if session else None


def _candidate_policy(spec, descriptor: str, seed: int):
    from .cli import parse_solver

    solver = parse_solver(descriptor)
    if solver == "vi":
        vt = value_iteration(spec, 1e-6)
        return TabularPolicy(spec=spec, table=vt.greedy_policy)
    if isinstance(solver, MctsConfig):
        cfg = MctsConfig(
            iterations=solver.iterations,
            depth=solver.depth,
            exploration=solver.exploration,
            rollout_horizon=solver.rollout_horizon,
            rng_seed=solver.rng_seed or seed,
        )
        return MctsPolicy(spec=spec, config=cfg)
    raise ValueError(f"unsupported candidate {descriptor!r}")


def _compute_assessment(state: ServiceState, rec: TaskRecord, params: dict) -> dict:
    task, _ = task_from_doc(rec.doc)
    spec = build_mdp(task)
    seed = params["seed"]
    runs = params["runs"]
    candidate = _candidate_policy(spec, params["candidate"], mix64(seed, 0xCA9D))
    samples = monte_carlo(task, candidate, runs, mix64(seed, 0xA55E55), spec=spec)
    std = OutcomeStandard(z_star=params["zstar"], alpha=params["alpha"], k=params["k"])
    res = assess_outcomes(samples, std)

    x_s_payload = None
    trusted_summary = None
    if params["trusted"] == "surrogate":
        if state.model is None:
            raise HTTPException(409, "no surrogate model configured")
        trusted_side = surrogate.predict(
            state.model, surrogate.task_features(task, state.model.feature_schema)
        )
        sq_config = SolverQualityConfig(r_low=state.model.r_low, r_high=state.model.r_high)
        sq = x_s_from_samples(samples, trusted_side, sq_config)
        trusted_summary = {"mu": trusted_side.mu, "sigma": trusted_side.sigma, "source": "surrogate"}
        x_s_payload = reports.solverq_dict(sq, sq_config)
    else:
        trusted_policy = _candidate_policy(spec, params["trusted"], mix64(seed, 0x7D))
        trusted_samples = monte_carlo(task, trusted_policy, runs, mix64(seed, 0x75), spec=spec)
        lo = min(min(samples.values), min(trusted_samples.values))
        hi = max(max(samples.values), max(trusted_samples.values))
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        sq_config = SolverQualityConfig(r_low=lo, r_high=hi)
        sq = x_s_from_samples(samples, gaussian_from_samples(trusted_samples), sq_config)
        trusted_summary = reports.dist_summary_dict(summarize(trusted_samples))
        trusted_summary["source"] = params["trusted"]
        x_s_payload = reports.solverq_dict(sq, sq_config)

    return {
        "task_id": rec.task_id,
        "state": "assessed",
        "params": params,
        "x_o": reports.outcome_dict(std, res),
        "x_o_label": x_o_label(res.x_o),
        "x_s": x_s_payload,
        "x_s_label": x_s_label(x_s_payload["x_s"]) if x_s_payload else None,
        "candidate_summary": reports.dist_summary_dict(summarize(samples)),
        "trusted_summary": trusted_summary,
        "success_probability": float((samples.array() >= 0).mean()),
    }


def _execute_episode(state: ServiceState, rec: TaskRecord) -> dict:
    task, _ = task_from_doc(rec.doc)
    spec = build_mdp(task)
    params = rec.assess_params or {}
    candidate = _candidate_policy(
        spec, params.get("candidate", state.config.candidate), mix64(rec.seed, 0xCA9D)
    )
    # execution seed deliberately disjoint from every assessment stream
    trace, total = simulate_episode(task, candidate, mix64(rec.seed, 0xEEC57E), spec=spec)
    scoring = _scoring_for(state, rec)
    if trace.terminal_kind == "delivered":
        delta = scoring.reward_success
    elif trace.terminal_kind == "caught":
        delta = -scoring.penalty_approved_capture
    else:
        delta = scoring.timeout_delta
    n = task.network.n
    steps = []
    for s, a, r in trace.steps:
        adt, mg = divmod(s, n)
        steps.append({"adt": adt, "mg": mg, "action": a, "reward": r})
    return {
        "kind": trace.terminal_kind,
        "executed": True,
        "reward": total,
        "trace": steps,
        "start": {"adt": task.adt_start, "mg": task.mg_start, "goal": task.goal},
        "score_delta": delta,
    }
