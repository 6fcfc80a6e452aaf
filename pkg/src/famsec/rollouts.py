"""Monte-Carlo simulation of policies on delivery tasks.

Episodes are seeded individually from a base seed, so batches are
bit-reproducible and order-stable no matter how many workers run them.
Cumulative rewards are plain non-discounted sums of step rewards; the
discounted variant exists only to cross-check value iteration.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from random import Random

import numpy as np

from .delivery import DeliveryTask, build_mdp
from .mdp import MctsPolicy, Policy, TabularMdp, TabularPolicy, ValueTable, policy_action
from .seeding import episode_seed, mix64


class EmptySamples(ValueError):
    pass


@dataclass(frozen=True)
class TraceLog:
    """(state, action, reward) triples for one episode."""

    steps: tuple[tuple[int, int, float], ...]
    terminal_kind: str  # delivered | caught | timeout


@dataclass(frozen=True)
class RewardSamples:
    """Empirical cumulative-reward distribution from a Monte-Carlo batch."""

    values: tuple[float, ...]
    base_seed: int
    run_count: int
    terminals: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.values) != self.run_count:
            raise ValueError("run_count does not match sample count")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("non-finite cumulative reward")

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class DistSummary:
    mean: float
    std: float
    stderr: float
    min: float
    max: float
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    n: int
    flags: tuple[str, ...] = ()


def simulate_episode(
    task: DeliveryTask,
    policy: Policy,
    episode_seed: int,
    spec: TabularMdp | None = None,
) -> tuple[TraceLog, float]:
    """Run one episode; returns the trace and the cumulative reward.

    Online planner policies are re-seeded from the episode seed so that
    separate episodes sample the planner's own randomness independently.
    An episode ends at an absorbing state or after ``task.t_max`` steps
    (terminal_kind "timeout").  A task that starts on its goal delivers
    immediately with the goal reward and an empty trace.
    """
    if task.adt_start == task.goal:
        return TraceLog(steps=(), terminal_kind="delivered"), task.rewards.goal
    spec = spec if spec is not None else (policy.spec if hasattr(policy, "spec") else build_mdp(task))
    pol = policy.reseeded(mix64(episode_seed, 0x1E9)) if isinstance(policy, MctsPolicy) else policy
    rng = Random(mix64(episode_seed, 0x51))
    delivered = spec.info.get("delivered_state")
    s = spec.info["start_state"]
    steps: list[tuple[int, int, float]] = []
    total = 0.0
    kind = "timeout"
    for t in range(task.t_max):
        a = policy_action(pol, s, t)
        slot = spec._acts[s].index(a)
        s2, r = spec.sample_step(s, slot, rng.random())
        steps.append((s, a, r))
        total += r
        s = s2
        if spec.is_terminal(s):
            kind = "delivered" if s == delivered else "caught"
            break
    return TraceLog(steps=tuple(steps), terminal_kind=kind), total


def _episode_batch(args) -> list[tuple[float, str]]:
    task, policy, spec, seeds = args
    out = []
    for seed in seeds:
        trace, total = simulate_episode(task, policy, seed, spec=spec)
        out.append((total, trace.terminal_kind))
    return out


def monte_carlo(
    task: DeliveryTask,
    policy: Policy,
    m: int,
    base_seed: int,
    workers: int = 1,
    spec: TabularMdp | None = None,
) -> RewardSamples:
    """m independent episodes with per-episode derived seeds.

    Results are identical for any ``workers`` value because every episode
    owns its seed and output stays in episode order.
    """
    if m < 1:
        raise ValueError("need at least one run")
    if spec is None:
        spec = policy.spec if hasattr(policy, "spec") else build_mdp(task)
    seeds = [episode_seed(base_seed, i) for i in range(m)]
    if workers <= 1 or m < 4 * workers:
        results = _episode_batch((task, policy, spec, seeds))
    else:
        chunk = (m + workers - 1) // workers
        jobs = [
            (task, policy, spec, seeds[i : i + chunk]) for i in range(0, m, chunk)
        ]
        results = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_episode_batch, jobs):
                results.extend(part)
    return RewardSamples(
        values=tuple(v for v, _ in results),
        base_seed=base_seed,
        run_count=m,
        terminals=tuple(k for _, k in results),
    )


def summarize(samples: RewardSamples, bin_count: int = 30) -> DistSummary:
    """Gaussian and histogram summary of a sample batch.

    Spread uses the m-1 denominator.  Batches with fewer than two values
    or zero spread are flagged "degenerate" and report a zero std.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    vals = samples.array()
    n = len(vals)
    if n == 0:
        raise EmptySamples("cannot summarize an empty batch")
    flags: list[str] = []
    lo, hi = float(vals.min()), float(vals.max())
    if n < 2 or lo == hi:
        std = 0.0
        flags.append("degenerate")
    else:
        std = float(vals.std(ddof=1))
    counts, edges = np.histogram(vals, bins=bin_count, range=(lo, hi))
    return DistSummary(
        mean=float(vals.mean()),
        std=std,
        stderr=std / math.sqrt(n),
        min=lo,
        max=hi,
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        n=n,
        flags=tuple(flags),
    )


def export_samples_csv(samples: RewardSamples, path) -> None:
    with open(path, "w") as fh:
        fh.write("episode,seed,cum_reward,terminal\n")
        for i, v in enumerate(samples.values):
            kind = samples.terminals[i] if samples.terminals else ""
            fh.write(f"{i},{episode_seed(samples.base_seed, i)},{v!r},{kind}\n")


@dataclass(frozen=True)
class DiscountedBridge:
    empirical_mean: float
    vi_value: float
    stderr: float
    z_score: float
    m: int


def discounted_return_check(
    task: DeliveryTask,
    value_table: ValueTable,
    m: int,
    base_seed: int,
    spec: TabularMdp | None = None,
) -> DiscountedBridge:
    """Compare mean discounted episode return under the greedy policy
    against the solved start-state value."""
    spec = spec if spec is not None else build_mdp(task)
    policy = TabularPolicy(spec=spec, table=dict(value_table.greedy_policy))
    gamma = task.gamma
    returns = np.empty(m)
    for i in range(m):
        trace, _ = simulate_episode(task, policy, episode_seed(base_seed, i), spec=spec)
        g = 0.0
        disc = 1.0
        for _, _, r in trace.steps:
            g += disc * r
            disc *= gamma
        returns[i] = g
    vi_value = value_table.values[spec.info["start_state"]]
    emp = float(returns.mean())
    stderr = float(returns.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    diff = abs(emp - vi_value)
    z = diff / stderr if stderr > 0 else (0.0 if diff == 0 else math.inf)
    return DiscountedBridge(empirical_mean=emp, vi_value=vi_value, stderr=stderr, z_score=z, m=m)
