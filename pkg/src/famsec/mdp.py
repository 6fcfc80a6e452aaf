"""Finite MDPs and the two solvers used everywhere else.

A tabular spec holds explicit transition rows.  Two solvers operate on it:
exact value iteration (the reference) and an online UCT tree search (the
resource-bounded approximation).  Both are deterministic given their
inputs, including the search seed.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from random import Random
from typing import Iterable, Mapping, Sequence

import numpy as np

from .seeding import mix64

_PROB_TOL = 1e-9


class InvalidSpec(ValueError):
    """The transition table violates an MDP invariant."""


class InvalidState(ValueError):
    """Planning was requested from a terminal or unknown state."""


class MissingState(KeyError):
    """A tabular policy has no entry for the queried state."""


class TabularMdp:
    """Enumerable MDP with explicit (next, prob, reward) transition rows.

    ``transitions`` maps state -> action -> sequence of
    ``(next_state, probability, reward)``.  Terminal states carry no
    actions and yield zero onward reward by construction.  Instances are
    immutable after construction and safe to share across workers.
    """

    def __init__(
        self,
        gamma: float,
        transitions: Mapping[int, Mapping[int, Sequence[tuple[int, float, float]]]],
        terminal_states: Iterable[int] = (),
        info: dict | None = None,
        validate: bool = True,
    ):
        self.gamma = float(gamma)
        self.info = dict(info or {})
        self._terminal = frozenset(int(s) for s in terminal_states)
        self._acts: dict[int, tuple[int, ...]] = {}
        # per state, per action slot: (next ids, cumulative probs, rewards)
        self._steps: dict[int, tuple[tuple, ...]] = {}
        self._probs: dict[int, tuple[tuple[float, ...], ...]] = {}

        for s, by_action in transitions.items():
            s = int(s)
            acts = tuple(int(a) for a in by_action)
            slots = []
            probs = []
            for a in by_action:
                row = list(by_action[a])
                nexts = tuple(int(n) for n, _, _ in row)
                ps = tuple(float(p) for _, p, _ in row)
                rews = tuple(float(r) for _, _, r in row)
                cum: list[float] = []
                acc = 0.0
                for p in ps:
                    acc += p
                    cum.append(acc)
                if cum:
                    cum[-1] = 1.0  # guard sampling against float drift
                slots.append((nexts, tuple(cum), rews))
                probs.append(ps)
            self._acts[s] = acts
            self._steps[s] = tuple(slots)
            self._probs[s] = tuple(probs)

        self._states = tuple(sorted(set(self._acts) | self._terminal))
        if validate:
            self._validate()

    def _validate(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise InvalidSpec(f"discount must be in [0,1), got {self.gamma}")
        known = set(self._states)
        for s in self._terminal:
            if s in self._acts:
                raise InvalidSpec(f"terminal state {s} has actions")
        for s, acts in self._acts.items():
            if not acts:
                raise InvalidSpec(f"non-terminal state {s} has no actions")
            if len(set(acts)) != len(acts):
                raise InvalidSpec(f"duplicate action ids at state {s}")
            for slot, ps in zip(self._steps[s], self._probs[s]):
                nexts = slot[0]
                if not nexts:
                    raise InvalidSpec(f"empty transition row at state {s}")
                total = 0.0
                for p in ps:
                    if not -_PROB_TOL <= p <= 1.0 + _PROB_TOL:
                        raise InvalidSpec(f"probability {p} out of range at state {s}")
                    total += p
                if abs(total - 1.0) > _PROB_TOL:
                    raise InvalidSpec(
                        f"transition row at state {s} sums to {total}, not 1"
                    )
                for n in nexts:
                    if n not in known:
                        raise InvalidSpec(f"transition to unknown state {n} from {s}")

    # -- spec interface ------------------------------------------------

    @property
    def states(self) -> tuple[int, ...]:
        return self._states

    def actions(self, state: int) -> tuple[int, ...]:
        return self._acts.get(state, ())

    def transition(self, state: int, action: int) -> list[tuple[int, float]]:
        slot = self._slot(state, action)
        nexts, _, _ = self._steps[state][slot]
        return list(zip(nexts, self._probs[state][slot]))

    def reward(self, state: int, action: int, next_state: int) -> float:
        slot = self._slot(state, action)
        nexts, _, rews = self._steps[state][slot]
        for n, r in zip(nexts, rews):
            if n == next_state:
                return r
        raise InvalidState(f"no transition {state} -[{action}]-> {next_state}")

    def is_terminal(self, state: int) -> bool:
        return state in self._terminal

    def _slot(self, state: int, action: int) -> int:
        try:
            return self._acts[state].index(action)
        except (KeyError, ValueError):
            raise InvalidState(f"action {action} not legal at state {state}") from None

    def sample_step(self, state: int, slot: int, u: float) -> tuple[int, float]:
        """Next state and reward for uniform draw ``u`` in [0,1)."""
        nexts, cum, rews = self._steps[state][slot]
        i = bisect_right(cum, u)
        if i >= len(nexts):
            i = len(nexts) - 1
        return nexts[i], rews[i]


@dataclass(frozen=True)
class ValueTable:
    """Converged (or best-effort) state values and the greedy policy."""

    values: dict[int, float]
    greedy_policy: dict[int, int]
    residual: float
    sweeps: int
    converged: bool
    tolerance: float
    residuals: tuple[float, ...] = ()


def value_iteration(
    spec: TabularMdp, tolerance: float = 1e-6, max_sweeps: int = 10_000
) -> ValueTable:
    """Exact dynamic-programming solve of a tabular MDP.

    Sweeps Bellman backups until the max residual drops below
    ``tolerance`` or ``max_sweeps`` is hit (reported via ``converged``).
    Greedy actions break ties toward the lowest slot in the ordered
    action list, so output is bit-reproducible.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    gamma = spec.gamma
    nonterm = [s for s in spec.states if not spec.is_terminal(s)]
    index = {s: i for i, s in enumerate(spec.states)}

    # Flatten (state, action, transition) into arrays for vectorized sweeps.
    sa_state: list[int] = []
    sa_starts: list[int] = []
    tr_sa: list[int] = []
    tr_next: list[int] = []
    tr_p: list[float] = []
    tr_r: list[float] = []
    for s in nonterm:
        sa_starts.append(len(sa_state))
        for slot in range(len(spec.actions(s))):
            k = len(sa_state)
            sa_state.append(index[s])
            nexts, _, rews = spec._steps[s][slot]
            for n, p, r in zip(nexts, spec._probs[s][slot], rews):
                tr_sa.append(k)
                tr_next.append(index[n])
                tr_p.append(p)
                tr_r.append(r)

    n_sa = len(sa_state)
    sa_starts_arr = np.asarray(sa_starts, dtype=np.intp)
    tr_sa_arr = np.asarray(tr_sa, dtype=np.intp)
    tr_next_arr = np.asarray(tr_next, dtype=np.intp)
    tr_p_arr = np.asarray(tr_p)
    tr_r_arr = np.asarray(tr_r)
    nonterm_idx = np.asarray([index[s] for s in nonterm], dtype=np.intp)

    values = np.zeros(len(spec.states))
    residuals: list[float] = []
    residual = math.inf
    sweeps = 0
    while sweeps < max_sweeps:
        contrib = tr_p_arr * (tr_r_arr + gamma * values[tr_next_arr])
        q = np.bincount(tr_sa_arr, weights=contrib, minlength=n_sa)
        new_v = values.copy()
        if n_sa:
            new_v[nonterm_idx] = np.maximum.reduceat(q, sa_starts_arr)
        residual = float(np.max(np.abs(new_v - values))) if len(values) else 0.0
        values = new_v
        residuals.append(residual)
        sweeps += 1
        if residual <= tolerance:
            break

    # Final greedy extraction with lowest-slot tie-break.
    contrib = tr_p_arr * (tr_r_arr + gamma * values[tr_next_arr])
    q = np.bincount(tr_sa_arr, weights=contrib, minlength=n_sa)
    greedy: dict[int, int] = {}
    for si, s in enumerate(nonterm):
        start = sa_starts[si]
        stop = sa_starts[si + 1] if si + 1 < len(nonterm) else n_sa
        row = q[start:stop]
        best = int(np.argmax(row))  # argmax returns first maximal slot
        greedy[s] = spec.actions(s)[best]

    return ValueTable(
        values={s: float(values[index[s]]) for s in spec.states},
        greedy_policy=greedy,
        residual=residual,
        sweeps=sweeps,
        converged=residual <= tolerance,
        tolerance=tolerance,
        residuals=tuple(residuals),
    )


@dataclass(frozen=True)
class MctsConfig:
    """Search budget for the online planner.

    ``rollout_horizon`` defaults to ``depth + 20`` random steps past the
    tree frontier.
    """

    iterations: int = 1000
    depth: int = 5
    exploration: float = 1000.0
    rollout_horizon: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.exploration < 0:
            raise ValueError("exploration must be non-negative")

    @property
    def horizon(self) -> int:
        return self.rollout_horizon if self.rollout_horizon is not None else self.depth + 20


def mcts_plan(
    spec: TabularMdp,
    state: int,
    config: MctsConfig,
    instrument: list | None = None,
) -> int:
    """One UCT planning call: pick an action for ``state``.

    Builds a tree of at most ``config.depth`` action levels with
    ``config.iterations`` simulations.  Selection maximizes
    Q + exploration * sqrt(ln N(s) / N(s,a)); unvisited actions are taken
    first in slot order.  Leaves are scored by uniform-random rollouts
    discounted per step; backups are running means.  Deterministic given
    (spec, state, config).

    ``instrument``, when given, collects (depth, state, chosen slot,
    visit counts) tuples for every tree-policy selection.
    """
    if spec.is_terminal(state):
        raise InvalidState(f"cannot plan from terminal state {state}")
    if state not in spec._acts:
        raise InvalidState(f"unknown state {state}")

    rng = Random(config.rng_seed)
    rr = rng.random
    ri = rng.randrange
    steps = spec._steps
    terminal = spec._terminal
    gamma = spec.gamma
    c = config.exploration
    horizon = config.horizon
    log = math.log
    sqrt = math.sqrt

    def rollout(s: int) -> float:
        total = 0.0
        disc = 1.0
        for _ in range(horizon):
            if s in terminal:
                break
            slots = steps[s]
            nexts, cum, rews = slots[ri(len(slots))]
            i = bisect_right(cum, rr())
            if i >= len(nexts):
                i = len(nexts) - 1
            total += disc * rews[i]
            disc *= gamma
            s = nexts[i]
        return total

    tree: dict[tuple[int, int], list] = {}

    def simulate(s: int, depth: int) -> float:
        if s in terminal:
            return 0.0
        if depth == 0:
            return rollout(s)
        key = (s, depth)
        node = tree.get(key)
        if node is None:
            k = len(steps[s])
            tree[key] = [0, [0] * k, [0.0] * k]
            return rollout(s)
        total_n, na, q = node
        a = -1
        for i, n_i in enumerate(na):
            if n_i == 0:
                a = i
                break
        if a < 0:
            log_n = log(total_n)
            best = -math.inf
            for i, n_i in enumerate(na):
                u = q[i] + c * sqrt(log_n / n_i)
                if u > best:
                    best = u
                    a = i
        if instrument is not None:
            instrument.append((depth, s, a, tuple(na)))
        nexts, cum, rews = steps[s][a]
        i = bisect_right(cum, rr())
        if i >= len(nexts):
            i = len(nexts) - 1
        g = rews[i] + gamma * simulate(nexts[i], depth - 1)
        node[0] = total_n + 1
        na[a] += 1
        q[a] += (g - q[a]) / na[a]
        return g

    for _ in range(config.iterations):
        simulate(state, config.depth)

    root = tree.get((state, config.depth))
    acts = spec._acts[state]
    if root is None:
        return acts[0]
    _, na, q = root
    best_slot = 0
    best_q = -math.inf
    for i, n_i in enumerate(na):
        if n_i > 0 and q[i] > best_q:
            best_q = q[i]
            best_slot = i
    return acts[best_slot]


@dataclass(frozen=True)
class TabularPolicy:
    """Fixed state -> action lookup, e.g. the greedy policy from VI."""

    spec: TabularMdp
    table: Mapping[int, int]

    @classmethod
    def from_value_table(cls, spec: TabularMdp, vt: ValueTable) -> "TabularPolicy":
        return cls(spec=spec, table=dict(vt.greedy_policy))


@dataclass(frozen=True)
class MctsPolicy:
    """Online policy: replans with UCT at every queried state.

    Each call derives its search seed from (config seed, state, step), so
    a policy object is a deterministic function of those three values.
    ``reseeded`` mixes a salt into the config seed; the rollout engine
    uses it to give every Monte-Carlo episode an independent planner
    stream while staying reproducible.
    """

    spec: TabularMdp
    config: MctsConfig

    def reseeded(self, salt: int) -> "MctsPolicy":
        return MctsPolicy(
            spec=self.spec,
            config=replace(self.config, rng_seed=mix64(self.config.rng_seed, salt)),
        )


Policy = TabularPolicy | MctsPolicy


def policy_action(policy: Policy, state: int, step: int = 0) -> int:
    """Action chosen by ``policy`` at ``state`` on decision epoch ``step``."""
    if isinstance(policy, TabularPolicy):
        try:
            return policy.table[state]
        except KeyError:
            raise MissingState(f"tabular policy has no action for state {state}") from None
    seed = mix64(policy.config.rng_seed, state, step)
    return mcts_plan(policy.spec, state, replace(policy.config, rng_seed=seed))
