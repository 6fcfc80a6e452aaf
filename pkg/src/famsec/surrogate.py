"""Surrogate performance model for the trusted solver.

Two small feed-forward regressors predict the trusted solver's
cumulative-reward mean and spread from task features (node count and
transition probability by default), so the solver-quality indicator can
run on unseen tasks without executing the trusted solver.  Training data
comes from raw task draws filtered for admissibility, solved with the
trusted solver and rolled out Monte-Carlo style.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import delivery
from .delivery import DeliveryTask, Rewards, SampleStats, admissible_task, build_mdp
from .mdp import MctsConfig, MctsPolicy, TabularPolicy, value_iteration
from .mlp import Mlp
from .rollouts import monte_carlo
from .seeding import mix64
from .solverq import GaussianSummary

MODEL_SCHEMA_VERSION = 1
BASELINE_SCHEMA = ("n_nodes", "p_trans")
EXTENDED_FIELDS = ("e_m", "d_m", "its_m")

# Trusted solver used to build datasets when nothing else is requested:
# a deliberately over-resourced tree search able to cope with the whole
# task family.
DEFAULT_TRUSTED = MctsConfig(iterations=1000, depth=3, exploration=1000.0)


class SchemaMismatch(ValueError):
    pass


class SchemaVersionMismatch(ValueError):
    pass


class CorruptFile(ValueError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple[int, ...] = (10, 10)
    dropout_rate: float = 0.3
    epochs: int = 500
    learning_rate: float = 1e-3
    batch_size: int = 32
    validation_fraction: float = 0.2
    rng_seed: int = 0
    spread_target: str = "std"  # or "stderr"

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0,1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.spread_target not in ("std", "stderr"):
            raise ValueError("spread_target must be 'std' or 'stderr'")


@dataclass(frozen=True)
class TrainingRow:
    features: tuple[float, ...]
    reward_mean: float
    reward_spread: float  # sample standard deviation of the run batch
    n_runs: int


@dataclass(frozen=True)
class TrainingSet:
    rows: tuple[TrainingRow, ...]
    r_low: float
    r_high: float
    feature_schema: tuple[str, ...]
    base_seed: int
    trusted: str
    stats: SampleStats = field(default_factory=SampleStats)

    def __post_init__(self):
        if self.rows and not self.r_low < self.r_high:
            raise ValueError("need r_low < r_high")
        for row in self.rows:
            if row.n_runs < 2:
                raise ValueError("each row needs at least two runs")


@dataclass
class TaskSampler:
    """Raw task draws over the feature ranges used for training."""

    n_range: tuple[int, int] = (8, 35)
    p_trans_range: tuple[float, float] = (0.0, 1.0)
    rewards: Rewards = field(default_factory=Rewards)
    gamma: float = 0.95
    t_max: int = 50
    mg_pursue_prob: float = 0.7

    def draw(self, seed: int) -> DeliveryTask:
        return delivery.draw_task(
            seed,
            n_range=self.n_range,
            p_trans_range=self.p_trans_range,
            rewards=self.rewards,
            gamma=self.gamma,
            t_max=self.t_max,
            mg_pursue_prob=self.mg_pursue_prob,
        )


def trusted_policy(spec, trusted_config):
    """Policy for a trusted-solver descriptor: MctsConfig or \"vi\"."""
    if trusted_config == "vi":
        vt = value_iteration(spec, 1e-6)
        return TabularPolicy(spec=spec, table=vt.greedy_policy)
    if isinstance(trusted_config, MctsConfig):
        return MctsPolicy(spec=spec, config=trusted_config)
    raise ValueError(f"unsupported trusted solver {trusted_config!r}")


def describe_solver(config) -> str:
    if config == "vi":
        return "vi"
    return (
        f"mcts(d={config.depth},its={config.iterations},"
        f"e={config.exploration},h={config.horizon})"
    )


def task_features(task: DeliveryTask, schema=BASELINE_SCHEMA, solver: MctsConfig | None = None):
    out = []
    for name in schema:
        if name == "n_nodes":
            out.append(float(task.network.n))
        elif name == "p_trans":
            out.append(float(task.p_trans))
        elif name == "e_m":
            out.append(float(solver.exploration))
        elif name == "d_m":
            out.append(float(solver.depth))
        elif name == "its_m":
            out.append(float(solver.iterations))
        else:
            raise SchemaMismatch(f"unknown feature {name!r}")
    return tuple(out)


def generate_training_data(
    task_sampler: TaskSampler,
    trusted_config,
    task_count: int,
    m_runs: int,
    base_seed: int,
    feature_schema=BASELINE_SCHEMA,
    workers: int = 1,
) -> TrainingSet:
    """Draw ``task_count`` raw tasks, keep the admissible ones, and
    record the trusted solver's reward mean/spread on each.

    The kept-row count is smaller than ``task_count`` whenever the
    admissibility filter rejects draws; per-reason counts live in
    ``stats``.  The pooled raw rewards give the global range used later
    for scale context.
    """
    if task_count < 1:
        raise ValueError("task_count must be >= 1")
    stats = SampleStats()
    rows: list[TrainingRow] = []
    r_low = math.inf
    r_high = -math.inf
    for i in range(task_count):
        try:
            task = task_sampler.draw(mix64(base_seed, 0x7A11, i))
        except delivery.GenerationFailed:
            stats.generated += 1
            stats.reject("generation failed")
            continue
        stats.generated += 1
        ok, reason = admissible_task(task)
        if not ok:
            stats.reject(reason or "rejected")
            continue
        stats.accepted += 1
        spec = build_mdp(task)
        policy = trusted_policy(spec, trusted_config)
        solver = trusted_config if isinstance(trusted_config, MctsConfig) else None
        samples = monte_carlo(
            task, policy, m_runs, mix64(base_seed, 0x3C2, i), workers=workers, spec=spec
        )
        vals = samples.array()
        rows.append(
            TrainingRow(
                features=task_features(task, feature_schema, solver),
                reward_mean=float(vals.mean()),
                reward_spread=float(vals.std(ddof=1)) if m_runs > 1 else 0.0,
                n_runs=m_runs,
            )
        )
        r_low = min(r_low, float(vals.min()))
        r_high = max(r_high, float(vals.max()))
    if not rows:
        raise delivery.GenerationFailed("no admissible task survived the filter")
    if r_low == r_high:  # every run identical; keep the range usable
        r_low, r_high = r_low - 1.0, r_high + 1.0
    return TrainingSet(
        rows=tuple(rows),
        r_low=r_low,
        r_high=r_high,
        feature_schema=tuple(feature_schema),
        base_seed=base_seed,
        trusted=describe_solver(trusted_config),
        stats=stats,
    )


@dataclass
class SurrogateModel:
    mean_net: Mlp
    spread_net: Mlp
    feature_schema: tuple[str, ...]
    feature_center: np.ndarray
    feature_scale: np.ndarray
    target_center: dict[str, float]
    target_scale: dict[str, float]
    r_low: float
    r_high: float
    metadata: dict

    @property
    def sigma_min(self) -> float:
        return 1e-6 * (self.r_high - self.r_low)

    def _normalize(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float).reshape(-1)
        if x.shape[0] != len(self.feature_schema):
            raise SchemaMismatch(
                f"expected {len(self.feature_schema)} features "
                f"{self.feature_schema}, got {x.shape[0]}"
            )
        if not np.all(np.isfinite(x)):
            raise SchemaMismatch("non-finite feature value")
        return (x - self.feature_center) / self.feature_scale


def predict(model: SurrogateModel, features) -> GaussianSummary:
    """Predicted trusted reward distribution at a feature point.

    Dropout is training-only; inference is deterministic.  The spread
    output is clamped below by the model's sigma floor.
    """
    x = model._normalize(features)[None, :]
    mu = float(model.mean_net.predict(x)[0]) * model.target_scale["mean"] + model.target_center["mean"]
    sp = float(model.spread_net.predict(x)[0]) * model.target_scale["spread"] + model.target_center["spread"]
    return GaussianSummary(mu=mu, sigma=max(sp, model.sigma_min))


def _epoch_mse(net: Mlp, x: np.ndarray, y: np.ndarray, scale: float) -> float:
    pred = net.predict(x)
    return float(np.mean((pred - y) ** 2)) * scale * scale


def train_surrogate(data: TrainingSet, config: MlpConfig = MlpConfig()) -> SurrogateModel:
    """Fit the mean and spread regressors with mini-batch SGD.

    Features and targets are standardized with training statistics;
    dropout regularizes the hidden layers.  Loss curves (original target
    units) for every epoch land in the returned metadata, along with an
    over-fit flag when final validation MSE exceeds twice the training
    MSE.
    """
    rows = data.rows
    if len(rows) < 2:
        raise ValueError("need at least two training rows")
    x = np.asarray([r.features for r in rows], dtype=float)
    targets = {
        "mean": np.asarray([r.reward_mean for r in rows], dtype=float),
        "spread": np.asarray(
            [
                r.reward_spread / math.sqrt(r.n_runs)
                if config.spread_target == "stderr"
                else r.reward_spread
                for r in rows
            ],
            dtype=float,
        ),
    }

    flags: list[str] = []
    feat_center = x.mean(axis=0)
    feat_scale = x.std(axis=0)
    if np.any(feat_scale == 0.0):
        flags.append("degenerate-features")
        feat_scale = np.where(feat_scale == 0.0, 1.0, feat_scale)
    xn = (x - feat_center) / feat_scale

    rng = np.random.Generator(np.random.PCG64(mix64(config.rng_seed, 0x5917)))
    n = len(rows)
    perm = rng.permutation(n)
    n_val = int(round(config.validation_fraction * n))
    if config.validation_fraction > 0 and n_val == 0 and n >= 5:
        n_val = 1
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if len(train_idx) == 0:
        train_idx, val_idx = perm, perm[:0]

    nets: dict[str, Mlp] = {}
    curves: dict[str, list[tuple[int, float, float]]] = {}
    center: dict[str, float] = {}
    scale: dict[str, float] = {}
    arch = [x.shape[1], *config.hidden_layers, 1]
    for tag, y in targets.items():
        c = float(y[train_idx].mean())
        s = float(y[train_idx].std())
        if s == 0.0:
            s = 1.0
            flags.append(f"degenerate-{tag}-target")
        center[tag], scale[tag] = c, s
        yn = (y - c) / s
        net_rng = np.random.Generator(
            np.random.PCG64(mix64(config.rng_seed, 0xA3, 0 if tag == "mean" else 1))
        )
        net = Mlp(arch, net_rng)
        curve: list[tuple[int, float, float]] = []
        xt, yt = xn[train_idx], yn[train_idx]
        for epoch in range(config.epochs):
            order = net_rng.permutation(len(train_idx))
            for lo in range(0, len(order), config.batch_size):
                batch = order[lo : lo + config.batch_size]
                _, gw, gb = net.loss_and_grads(
                    xt[batch], yt[batch], dropout_rate=config.dropout_rate, rng=net_rng
                )
                net.sgd_step(gw, gb, config.learning_rate)
            train_mse = _epoch_mse(net, xt, yt, s)
            val_mse = (
                _epoch_mse(net, xn[val_idx], yn[val_idx], s) if len(val_idx) else math.nan
            )
            curve.append((epoch, train_mse, val_mse))
        nets[tag] = net
        curves[tag] = curve

    final = curves["mean"][-1]
    if len(val_idx) and final[2] > 2.0 * final[1]:
        flags.append("possible-overfit")

    model = SurrogateModel(
        mean_net=nets["mean"],
        spread_net=nets["spread"],
        feature_schema=data.feature_schema,
        feature_center=feat_center,
        feature_scale=feat_scale,
        target_center=center,
        target_scale=scale,
        r_low=data.r_low,
        r_high=data.r_high,
        metadata={
            "config": {
                "hidden_layers": list(config.hidden_layers),
                "dropout_rate": config.dropout_rate,
                "epochs": config.epochs,
                "learning_rate": config.learning_rate,
                "batch_size": config.batch_size,
                "validation_fraction": config.validation_fraction,
                "rng_seed": config.rng_seed,
                "spread_target": config.spread_target,
            },
            "trusted": data.trusted,
            "rows": len(rows),
            "rejections": dict(sorted(data.stats.rejections.items())),
            "generated": data.stats.generated,
            "train_rows": int(len(train_idx)),
            "val_rows": int(len(val_idx)),
            "curves": {tag: [list(t) for t in cv] for tag, cv in curves.items()},
            "flags": flags,
        },
    )
    # soft sanity: mean predictions at the training points should stay
    # near the observed global reward range (flagged, never fatal)
    pad = 0.1 * (data.r_high - data.r_low)
    for row in rows:
        mu = predict(model, row.features).mu
        if not data.r_low - pad <= mu <= data.r_high + pad:
            model.metadata["flags"].append("prediction-outside-reward-range")
            break
    return model


def save_model(model: SurrogateModel, path) -> None:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "feature_schema": list(model.feature_schema),
        "normalization": {
            "feature_center": model.feature_center.tolist(),
            "feature_scale": model.feature_scale.tolist(),
            "target_center": model.target_center,
            "target_scale": model.target_scale,
        },
        "mean_net": model.mean_net.get_params(),
        "spread_net": model.spread_net.get_params(),
        "r_low": model.r_low,
        "r_high": model.r_high,
        "metadata": model.metadata,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path) -> SurrogateModel:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"unreadable model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptFile(f"model file {path} missing schema_version")
    if doc["schema_version"] != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"model schema {doc['schema_version']} != {MODEL_SCHEMA_VERSION}"
        )
    try:
        norm = doc["normalization"]
        return SurrogateModel(
            mean_net=Mlp.from_params(doc["mean_net"]),
            spread_net=Mlp.from_params(doc["spread_net"]),
            feature_schema=tuple(doc["feature_schema"]),
            feature_center=np.asarray(norm["feature_center"], dtype=float),
            feature_scale=np.asarray(norm["feature_scale"], dtype=float),
            target_center={k: float(v) for k, v in norm["target_center"].items()},
            target_scale={k: float(v) for k, v in norm["target_scale"].items()},
            r_low=float(doc["r_low"]),
            r_high=float(doc["r_high"]),
            metadata=doc.get("metadata", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"malformed model file {path}: {exc}") from exc


def export_training_curves_csv(model: SurrogateModel, path, net: str = "mean") -> None:
    curves = model.metadata.get("curves", {}).get(net, [])
    with open(path, "w") as fh:
        fh.write("epoch,train_mse,val_mse\n")
        for epoch, train_mse, val_mse in curves:
            fh.write(f"{epoch},{train_mse!r},{val_mse!r}\n")
