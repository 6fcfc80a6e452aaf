"""Command-line front end.

Subcommands: gen-network, assess, solverq, surrogate train|predict,
experiment <id>, serve.  Common flags: --seed, --runs, --out DIR,
--format json|csv.  Exit codes: 0 success, 2 validation error, 3 runtime
error.  Reports embed their seeds and configs and are byte-identical
across repeat runs and worker counts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import delivery, reports, surrogate
from .delivery import GenerationFailed, InvalidTask, build_mdp, load_task, sample_task, task_to_doc
from .experiments import EXPERIMENT_IDS, ExperimentSpec, MissingSurrogate, run_experiment
from .mdp import InvalidSpec, InvalidState, MctsConfig, MctsPolicy, TabularPolicy, value_iteration
from .outcome import OutcomeStandard, assess_outcomes, confidence_profile
from .rollouts import export_samples_csv, monte_carlo, summarize
from .seeding import mix64
from .solverq import SolverQualityConfig, gaussian_from_samples, x_s_from_samples
from .surrogate import CorruptFile, MlpConfig, SchemaMismatch, SchemaVersionMismatch, TaskSampler

DEFAULT_CANDIDATE = "mcts:d=3,its=100,e=1000"

VALIDATION_ERRORS = (
    InvalidTask,
    InvalidSpec,
    InvalidState,
    SchemaMismatch,
    SchemaVersionMismatch,
    CorruptFile,
    MissingSurrogate,
    ValueError,
    FileNotFoundError,
    KeyError,
)


def parse_solver(text: str):
    """Parse a solver descriptor: "vi" or "mcts:d=3,its=100,e=1000[,h=23][,seed=0]"."""
    text = text.strip()
    if text == "vi":
        return "vi"
    if text.startswith("surrogate:"):
        return ("surrogate", text.split(":", 1)[1])
    if not text.startswith("mcts:"):
        raise ValueError(f"unknown solver spec {text!r}; use 'vi', 'mcts:...', or 'surrogate:PATH'")
    fields = {}
    for part in text[5:].split(","):
        if not part:
            continue
        key, _, val = part.partition("=")
        fields[key.strip()] = val.strip()
    try:
        return MctsConfig(
            iterations=int(fields.get("its", 100)),
            depth=int(fields.get("d", 3)),
            exploration=float(fields.get("e", 1000.0)),
            rollout_horizon=int(fields["h"]) if "h" in fields else None,
            rng_seed=int(fields.get("seed", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad solver spec {text!r}: {exc}") from exc


def _policy_for(spec, solver, seed):
    if solver == "vi":
        vt = value_iteration(spec, 1e-6)
        return TabularPolicy(spec=spec, table=vt.greedy_policy), "vi"
    cfg = solver if solver.rng_seed else MctsConfig(
        iterations=solver.iterations,
        depth=solver.depth,
        exploration=solver.exploration,
        rollout_horizon=solver.rollout_horizon,
        rng_seed=seed,
    )
    return MctsPolicy(spec=spec, config=cfg), surrogate.describe_solver(cfg)


def _emit(doc: dict, artifacts: dict, args) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "report.json"
        reports.write_report(doc, report_path)
        written = [str(report_path)]
        for name, (header, rows) in artifacts.items():
            path = out / name
            reports.write_csv(path, header, rows)
            written.append(str(path))
        for w in written:
            print(w)
    elif args.format == "csv" and artifacts:
        for name, (header, rows) in artifacts.items():
            print(f"# {name}")
            print(header)
            for row in rows:
                print(",".join(reports._cell(v) for v in row))
    else:
        sys.stdout.write(reports.dumps_report(doc))


def cmd_gen_network(args) -> int:
    if args.kind:
        from random import Random

        net = delivery.generate_network(args.kind, args.n or 13, rng_seed=args.seed)
        task = None
        # place roles with the same admissibility retry used for sampling
        for attempt in range(500):
            rng = Random(mix64(args.seed, 0x6E0, attempt))
            adt, mg = rng.sample(range(net.n), 2)
            goal = rng.randrange(net.n)
            if goal == adt:
                goal = (goal + 1) % net.n
            candidate = delivery.DeliveryTask(
                network=net, adt_start=adt, mg_start=mg, goal=goal,
                p_trans=args.p_trans, gamma=args.gamma,
            )
            if delivery.admissible_task(candidate)[0]:
                task = candidate
                break
        if task is None:
            raise GenerationFailed(f"no admissible placement on this {args.kind} network")
    else:
        task = sample_task(
            args.seed,
            n_range=(args.n_min, args.n_max) if args.n is None else (args.n, args.n),
            p_trans_range=(args.p_trans, args.p_trans),
            gamma=args.gamma,
        )
    doc = task_to_doc(task, args.seed)
    if args.out:
        out = Path(args.out)
        if out.suffix != ".json":
            out.mkdir(parents=True, exist_ok=True)
            out = out / "task.json"
        out.write_text(json.dumps(doc, indent=2) + "\n")
        print(str(out))
    else:
        print(json.dumps(doc, indent=2))
    return 0


def cmd_assess(args) -> int:
    task, _ = load_task(args.task)
    spec = build_mdp(task)
    solver = parse_solver(args.candidate)
    if isinstance(solver, tuple):
        raise ValueError("assess candidate must be 'vi' or 'mcts:...'")
    policy, desc = _policy_for(spec, solver, mix64(args.seed, 0xCA9D))
    samples = monte_carlo(task, policy, args.runs, mix64(args.seed, 0xA55E55),
                          workers=args.workers, spec=spec)
    std = OutcomeStandard(z_star=args.zstar, alpha=args.alpha, k=args.k)
    res = assess_outcomes(samples, std)
    doc = {
        "schema_version": reports.REPORT_SCHEMA_VERSION,
        "kind": "assessment",
        "provenance": reports.provenance(
            args.seed,
            {"candidate": desc, "runs": args.runs, "zstar": args.zstar,
             "alpha": args.alpha, "k": args.k, "bins": args.bins},
        ),
        "task": task_to_doc(task, args.seed),
        "outcome": reports.outcome_dict(std, res),
        "candidate_summary": reports.dist_summary_dict(summarize(samples, args.bins)),
        "samples": reports.samples_note(samples),
    }
    if args.profile:
        grid = [float(z) for z in args.profile.split(",")]
        doc["confidence_profile"] = [
            {"z_star": z, "x_o": x} for z, x in confidence_profile(samples, grid, args.alpha, args.k)
        ]
    artifacts = {}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export_samples_csv(samples, out / "samples.csv")
    _emit(doc, artifacts, args)
    return 0


def cmd_solverq(args) -> int:
    task, _ = load_task(args.task)
    spec = build_mdp(task)
    cand_solver = parse_solver(args.candidate)
    if cand_solver == "vi" or isinstance(cand_solver, tuple):
        raise ValueError("candidate must be an mcts:... solver")
    cand_policy, cand_desc = _policy_for(spec, cand_solver, mix64(args.seed, 0xCA))
    cand_samples = monte_carlo(task, cand_policy, args.runs, mix64(args.seed, 0xC5),
                               workers=args.workers, spec=spec)

    trusted = parse_solver(args.trusted)
    model = None
    if isinstance(trusted, tuple):  # surrogate
        model = surrogate.load_model(trusted[1])
        trusted_side = surrogate.predict(model, surrogate.task_features(task, model.feature_schema))
        trusted_desc = f"surrogate:{trusted[1]}"
        r_low, r_high = model.r_low, model.r_high
        trusted_summary_dict = {"mu": trusted_side.mu, "sigma": trusted_side.sigma}
    else:
        trusted_policy, trusted_desc = _policy_for(spec, trusted, mix64(args.seed, 0x7D))
        trusted_samples = monte_carlo(task, trusted_policy, args.runs, mix64(args.seed, 0x75),
                                      workers=args.workers, spec=spec)
        trusted_side = gaussian_from_samples(trusted_samples)
        lo = min(min(cand_samples.values), min(trusted_samples.values))
        hi = max(max(cand_samples.values), max(trusted_samples.values))
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        r_low, r_high = lo, hi
        trusted_summary_dict = reports.dist_summary_dict(summarize(trusted_samples, args.bins))
    if args.r_low is not None:
        r_low = args.r_low
    if args.r_high is not None:
        r_high = args.r_high
    config = SolverQualityConfig(r_low=r_low, r_high=r_high, kappa=args.kappa, squash_gain=args.gain)
    res = x_s_from_samples(cand_samples, trusted_side, config)
    doc = {
        "schema_version": reports.REPORT_SCHEMA_VERSION,
        "kind": "solver_quality",
        "provenance": reports.provenance(
            args.seed,
            {"candidate": cand_desc, "trusted": trusted_desc, "runs": args.runs,
             "kappa": args.kappa, "squash_gain": args.gain},
        ),
        "task": task_to_doc(task, args.seed),
        "solver_quality": reports.solverq_dict(res, config),
        "candidate_summary": reports.dist_summary_dict(summarize(cand_samples, args.bins)),
        "trusted_summary": trusted_summary_dict,
        "samples": reports.samples_note(cand_samples),
    }
    _emit(doc, {}, args)
    return 0


def cmd_surrogate(args) -> int:
    if args.action == "train":
        from .experiments import _run_surrogate_pipeline_experiment

        trusted = parse_solver(args.trusted)
        if isinstance(trusted, tuple):
            raise ValueError("trusted solver for training must be 'vi' or 'mcts:...'")
        mlp_cfg = MlpConfig(
            hidden_layers=tuple(int(w) for w in args.hidden.split(",")),
            dropout_rate=args.dropout,
            epochs=args.epochs,
            learning_rate=args.lr,
            batch_size=args.batch,
            validation_fraction=args.val_frac,
            rng_seed=mix64(args.seed, 0x111),
            spread_target=args.spread_target,
        )
        spec = ExperimentSpec(
            id="surrogate_pipeline",
            m_runs=args.runs,
            base_seed=args.seed,
            params={
                "task_count": args.tasks,
                "trusted": trusted,
                "mlp": mlp_cfg,
                "sampler": TaskSampler(n_range=(args.n_min, args.n_max)),
            },
            workers=args.workers,
        )
        (doc, artifacts), model = _run_surrogate_pipeline_experiment(spec)
        out = Path(args.out or "surrogate_out")
        out.mkdir(parents=True, exist_ok=True)
        surrogate.save_model(model, out / "model.json")
        reports.write_report(doc, out / "report.json")
        for name, (header, rows) in artifacts.items():
            reports.write_csv(out / name, header, rows)
        print(str(out / "model.json"))
        print(str(out / "report.json"))
        return 0

    model = surrogate.load_model(args.model)
    if args.task:
        task, _ = load_task(args.task)
        feats = surrogate.task_features(task, model.feature_schema)
    elif args.features:
        feats = tuple(float(x) for x in args.features.split(","))
    else:
        raise ValueError("surrogate predict needs --task or --features")
    pred = surrogate.predict(model, feats)
    print(json.dumps({"features": list(feats), "mu": pred.mu, "sigma": pred.sigma}, indent=2))
    return 0


def cmd_experiment(args) -> int:
    params: dict = {}
    if args.its is not None:
        params["its"] = args.its
    if args.depths:
        params["depths"] = tuple(int(d) for d in args.depths.split(","))
    if args.trusted_depth is not None:
        params["trusted_depth"] = args.trusted_depth
    if args.model:
        params["model_path"] = args.model
    if args.task_count is not None:
        params["task_count"] = args.task_count
    if args.n_tasks is not None:
        params["n_tasks"] = args.n_tasks
    if args.p_grid:
        params["p_grid"] = [float(p) for p in args.p_grid.split(",")]
    spec = ExperimentSpec(
        id=args.id,
        m_runs=args.runs,
        base_seed=args.seed,
        params=params,
        workers=args.workers,
    )
    doc, artifacts = run_experiment(spec)
    _emit(doc, artifacts, args)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.load(args.config)
    if args.state_dir:
        config.state_dir = args.state_dir
    app = create_app(config)
    uvicorn.run(app, host=args.host or config.host, port=args.port or config.port, log_level="warning")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base seed for all randomness")
    p.add_argument("--runs", type=int, default=None, help="Monte-Carlo run count")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=1, help="rollout workers (does not change results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="famsec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-network", help="generate a random admissible task document")
    _add_common(p)
    p.add_argument("--kind", choices=[k for k in delivery.GENERATOR_TAGS if k != "manual"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-min", type=int, default=8)
    p.add_argument("--n-max", type=int, default=35)
    p.add_argument("--p-trans", type=float, default=0.7)
    p.add_argument("--gamma", type=float, default=0.95)
    p.set_defaults(func=cmd_gen_network)

    p = sub.add_parser("assess", help="outcome assessment for a task file")
    _add_common(p)
    p.add_argument("--task", required=True)
    p.add_argument("--zstar", type=float, default=0.0)
    p.add_argument("--alpha", type=int, default=1)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--candidate", default=DEFAULT_CANDIDATE)
    p.add_argument("--profile", default=None, help="comma list of z* grid points")
    p.set_defaults(func=cmd_assess, runs=500)

    p = sub.add_parser("solverq", help="solver quality for a task file")
    _add_common(p)
    p.add_argument("--task", required=True)
    p.add_argument("--trusted", required=True, help="'vi', 'mcts:...', or 'surrogate:MODEL.json'")
    p.add_argument("--candidate", default=DEFAULT_CANDIDATE)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--gain", type=float, default=5.0)
    p.add_argument("--r-low", type=float, default=None)
    p.add_argument("--r-high", type=float, default=None)
    p.add_argument("--bins", type=int, default=30)
    p.set_defaults(func=cmd_solverq, runs=500)

    p = sub.add_parser("surrogate", help="train or query the trusted-solver surrogate")
    _add_common(p)
    p.add_argument("action", choices=("train", "predict"))
    p.add_argument("--tasks", type=int, default=200, help="raw task draws for training")
    p.add_argument("--trusted", default="mcts:d=3,its=1000,e=1000")
    p.add_argument("--hidden", default="10,10")
    p.add_argument("--dropout", type=float, default=0.3)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--spread-target", choices=("std", "stderr"), default="std")
    p.add_argument("--n-min", type=int, default=8)
    p.add_argument("--n-max", type=int, default=35)
    p.add_argument("--model", default=None, help="model file (predict)")
    p.add_argument("--task", default=None, help="task file (predict)")
    p.add_argument("--features", default=None, help="comma list of raw features (predict)")
    p.set_defaults(func=cmd_surrogate, runs=30)

    p = sub.add_parser("experiment", help="run a named study")
    _add_common(p)
    p.add_argument("id", choices=EXPERIMENT_IDS)
    p.add_argument("--its", type=int, default=None)
    p.add_argument("--depths", default=None, help="comma list of candidate depths")
    p.add_argument("--trusted-depth", type=int, default=None)
    p.add_argument("--model", default=None, help="surrogate model file (exp3/exp4)")
    p.add_argument("--task-count", type=int, default=None)
    p.add_argument("--n-tasks", type=int, default=None)
    p.add_argument("--p-grid", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="start the assessment HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--state-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GenerationFailed as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
