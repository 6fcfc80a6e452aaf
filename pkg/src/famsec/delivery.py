"""Pursuit-evasion delivery tasks on random road networks.

A delivery truck starts somewhere on a connected road graph and must
reach a goal intersection before a pursuer intercepts it (co-location at
a node).  Tasks compile into joint-state tabular MDPs: the truck picks a
neighbor (or stays), motion slips with probability 1 - p_trans, and the
pursuer either steps along a shortest path toward the truck or wanders to
a random neighbor.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from random import Random

import networkx as nx

from .mdp import TabularMdp
from .seeding import mix64

SCHEMA_VERSION = 1
GENERATOR_TAGS = (
    "watts_strogatz",
    "expected_degree",
    "erdos_renyi",
    "static_scale_free",
    "manual",
)

MAX_EDGE_NODE_RATIO = 2.5
MIN_GOAL_DISTANCE = 2
MIN_MG_DISTANCE = 2
_UNREACHABLE = 1 << 30


class GenerationFailed(RuntimeError):
    """No connected graph after the attempt budget."""


class InvalidTask(ValueError):
    pass


@dataclass(frozen=True)
class RoadNetwork:
    """Undirected simple graph of road intersections."""

    n: int
    edges: tuple[tuple[int, int], ...]
    generator: str = "manual"
    layout: dict[int, tuple[float, float]] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidTask("network needs at least 2 nodes")
        if self.generator not in GENERATOR_TAGS:
            raise InvalidTask(f"unknown generator tag {self.generator!r}")
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise InvalidTask(f"self-loop at node {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InvalidTask(f"edge ({a},{b}) out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise InvalidTask(f"duplicate edge {key}")
            seen.add(key)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for row in adj:
            row.sort()
        return adj

    def is_connected(self) -> bool:
        return _bfs_distances(self.adjacency(), 0).count(_UNREACHABLE) == 0


def _canonical_edges(pairs) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((min(a, b), max(a, b)) for a, b in pairs))


def _bfs_distances(adj: list[list[int]], source: int) -> list[int]:
    dist = [_UNREACHABLE] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] == _UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def shortest_path_distance(network: RoadNetwork, a: int, b: int) -> int:
    """BFS hop count between two intersections (0 iff a == b)."""
    if not (0 <= a < network.n and 0 <= b < network.n):
        raise InvalidTask(f"node out of range: {a} or {b}")
    return _bfs_distances(network.adjacency(), a)[b]


def _static_scale_free_edges(n: int, m: int, rng: Random) -> set[tuple[int, int]]:
    # Static model: endpoints drawn with weight i^-alpha, alpha = 1 for
    # a degree exponent of 2.
    weights = [1.0 / (i + 1) for i in range(n)]
    total = sum(weights)
    cum = []
    acc = 0.0
    for w in weights:
        acc += w / total
        cum.append(acc)
    cum[-1] = 1.0

    def draw() -> int:
        u = rng.random()
        lo, hi = 0, n - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] < u:
                lo = mid + 1
            else:
                hi = mid
        return lo

    edges: set[tuple[int, int]] = set()
    budget = 400 * m
    while len(edges) < m and budget > 0:
        budget -= 1
        i, j = draw(), draw()
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return edges


def generate_network(
    kind: str,
    n: int,
    params: dict | None = None,
    rng_seed: int = 0,
    max_attempts: int = 100,
) -> RoadNetwork:
    """Generate a connected road network with one of four random models.

    Disconnected draws are retried with fresh sub-seeds, up to
    ``max_attempts``.  Defaults: Watts-Strogatz k=4 rewire=0.3; expected
    degrees Normal(4,1) clipped to [1, n-1]; 2n total edges for the
    Erdos-Renyi and static scale-free models.
    """
    if not 8 <= n <= 64:
        raise InvalidTask(f"node count {n} outside [8, 64]")
    if kind not in GENERATOR_TAGS or kind == "manual":
        raise InvalidTask(f"unknown generator kind {kind!r}")
    params = params or {}

    for attempt in range(max_attempts):
        sub = mix64(rng_seed, 0x6E37, attempt)
        if kind == "watts_strogatz":
            g = nx.watts_strogatz_graph(
                n, params.get("k", 4), params.get("rewire", 0.3), seed=sub % (1 << 32)
            )
            edges = _canonical_edges(g.edges())
        elif kind == "expected_degree":
            rng = Random(sub)
            degs = [
                min(max(rng.gauss(params.get("mean", 4.0), params.get("sd", 1.0)), 1.0), n - 1.0)
                for _ in range(n)
            ]
            g = nx.expected_degree_graph(degs, seed=sub % (1 << 32), selfloops=False)
            edges = _canonical_edges(g.edges())
        elif kind == "erdos_renyi":
            g = nx.gnm_random_graph(n, params.get("m", 2 * n), seed=sub % (1 << 32))
            edges = _canonical_edges(g.edges())
        else:  # static_scale_free
            edges = _canonical_edges(
                _static_scale_free_edges(n, params.get("m", 2 * n), Random(sub))
            )
        net = RoadNetwork(n=n, edges=edges, generator=kind)
        if net.is_connected():
            return RoadNetwork(
                n=n,
                edges=edges,
                generator=kind,
                layout=_spring_layout(n, edges, mix64(rng_seed, 0x1A70)),
            )
    raise GenerationFailed(f"{kind} with n={n}: no connected graph in {max_attempts} attempts")


def _spring_layout(n, edges, seed) -> dict[int, tuple[float, float]]:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    pos = nx.spring_layout(g, seed=seed % (1 << 32))
    return {int(v): (round(float(x), 6), round(float(y), 6)) for v, (x, y) in pos.items()}


@dataclass(frozen=True)
class Rewards:
    goal: float = 2000.0
    caught: float = -2000.0
    loiter: float = -200.0


@dataclass(frozen=True)
class DeliveryTask:
    """One pursuit-evasion delivery problem instance."""

    network: RoadNetwork
    adt_start: int
    mg_start: int
    goal: int
    p_trans: float = 0.7
    rewards: Rewards = field(default_factory=Rewards)
    gamma: float = 0.95
    t_max: int = 50
    mg_pursue_prob: float = 0.7

    def __post_init__(self):
        n = self.network.n
        for name, node in (("adt_start", self.adt_start), ("mg_start", self.mg_start), ("goal", self.goal)):
            if not 0 <= node < n:
                raise InvalidTask(f"{name}={node} out of range for n={n}")
        if self.adt_start == self.mg_start:
            raise InvalidTask("truck and pursuer cannot share a start node")
        if not 0.0 <= self.p_trans <= 1.0:
            raise InvalidTask(f"p_trans={self.p_trans} outside [0,1]")
        if not 0.0 <= self.mg_pursue_prob <= 1.0:
            raise InvalidTask(f"mg_pursue_prob={self.mg_pursue_prob} outside [0,1]")
        if not (self.rewards.goal > 0 > self.rewards.caught):
            raise InvalidTask("need reward ordering goal > 0 > caught")
        if self.rewards.loiter >= 0:
            raise InvalidTask("loiter penalty must be negative")
        if not 0.0 <= self.gamma < 1.0:
            raise InvalidTask(f"gamma={self.gamma} outside [0,1)")
        if self.t_max < 1:
            raise InvalidTask("t_max must be positive")

    # Joint-state encoding: truck node a and pursuer node m map to a*n + m;
    # two reserved absorbing ids sit just past the n^2 block.
    @property
    def caught_state(self) -> int:
        return self.network.n * self.network.n

    @property
    def delivered_state(self) -> int:
        return self.network.n * self.network.n + 1

    def encode(self, adt_node: int, mg_node: int) -> int:
        return adt_node * self.network.n + mg_node

    def decode(self, state: int) -> tuple[int, int]:
        n = self.network.n
        if not 0 <= state < n * n:
            raise InvalidTask(f"state {state} is not a joint physical state")
        return divmod(state, n)

    @property
    def start_state(self) -> int:
        return self.encode(self.adt_start, self.mg_start)


def admissible_task(task: DeliveryTask) -> tuple[bool, str | None]:
    """Filter mirroring the dataset-generation rules.

    Rejects dense graphs (edge/node ratio above 2.5) and placements where
    the truck starts within one hop of the goal or of the pursuer.
    """
    net = task.network
    if net.edge_count / net.n > MAX_EDGE_NODE_RATIO:
        return False, "edge ratio"
    adj = net.adjacency()
    dist = _bfs_distances(adj, task.adt_start)
    if dist[task.goal] < MIN_GOAL_DISTANCE:
        return False, "goal too close"
    if dist[task.mg_start] < MIN_MG_DISTANCE:
        return False, "mg too close"
    return True, None


def build_mdp(task: DeliveryTask) -> TabularMdp:
    """Compile a task into the joint-state MDP.

    Truck actions are MoveTo(neighbor) (action id = neighbor id, in
    ascending order) plus Stay (action id = n).  A move reaches the
    chosen neighbor with probability p_trans and slips uniformly to one
    of the other neighbors otherwise; Stay is deterministic.  The pursuer
    steps toward the truck's pre-move node along a shortest path with
    probability mg_pursue_prob (lowest-id tie-break) and to a uniform
    random neighbor otherwise.  Rewards attach to the post-move joint
    state: caught if co-located, goal if the truck is at the goal
    un-caught, loiter otherwise.
    """
    net = task.network
    n = net.n
    adj = net.adjacency()
    dists = [_bfs_distances(adj, s) for s in range(n)]
    r = task.rewards
    q = task.mg_pursue_prob
    caught, delivered = task.caught_state, task.delivered_state

    transitions: dict[int, dict[int, list[tuple[int, float, float]]]] = {}
    terminal = {caught, delivered}

    for adt in range(n):
        for mg in range(n):
            s = adt * n + mg
            if adt == mg or adt == task.goal:
                # alias of an absorbing outcome; unreachable by construction
                terminal.add(s)
                continue

            mg_nb = adj[mg]
            mg_dist: dict[int, float] = {}
            if not mg_nb:
                mg_dist[mg] = 1.0
            else:
                if q < 1.0:
                    w = (1.0 - q) / len(mg_nb)
                    for v in mg_nb:
                        mg_dist[v] = w
                if q > 0.0:
                    target = min(mg_nb, key=lambda v: (dists[v][adt], v))
                    mg_dist[target] = mg_dist.get(target, 0.0) + q

            actions: dict[int, list[tuple[int, float, float]]] = {}
            adt_nb = adj[adt]
            moves: list[tuple[int, dict[int, float]]] = []
            for target in adt_nb:
                if task.p_trans >= 1.0 or len(adt_nb) == 1:
                    adt_dist = {target: 1.0}
                else:
                    slip = (1.0 - task.p_trans) / (len(adt_nb) - 1)
                    adt_dist = {v: slip for v in adt_nb if v != target}
                    adt_dist[target] = adt_dist.get(target, 0.0) + task.p_trans
                moves.append((target, adt_dist))
            moves.append((n, {adt: 1.0}))  # stay

            for action_id, adt_dist in moves:
                row: dict[int, tuple[float, float]] = {}
                for a2, pa in adt_dist.items():
                    for m2, pm in mg_dist.items():
                        p = pa * pm
                        if p <= 0.0:
                            continue
                        if a2 == m2:
                            key, rew = caught, r.caught
                        elif a2 == task.goal:
                            key, rew = delivered, r.goal
                        else:
                            key, rew = a2 * n + m2, r.loiter
                        old = row.get(key)
                        row[key] = (old[0] + p if old else p, rew)
                actions[action_id] = [
                    (s2, p, rew) for s2, (p, rew) in sorted(row.items())
                ]
            transitions[s] = actions

    return TabularMdp(
        gamma=task.gamma,
        transitions=transitions,
        terminal_states=terminal,
        info={
            "start_state": task.start_state,
            "caught_state": caught,
            "delivered_state": delivered,
            "n_nodes": n,
            "goal": task.goal,
            "t_max": task.t_max,
        },
    )


# -- task document (de)serialization ------------------------------------


def task_to_doc(task: DeliveryTask, seed: int = 0) -> dict:
    net = task.network
    doc = {
        "schema_version": SCHEMA_VERSION,
        "network": {
            "n": net.n,
            "edges": [[a, b] for a, b in net.edges],
            "generator": net.generator,
        },
        "task": {
            "adt_start": task.adt_start,
            "mg_start": task.mg_start,
            "goal": task.goal,
            "p_trans": task.p_trans,
            "rewards": {
                "goal": task.rewards.goal,
                "caught": task.rewards.caught,
                "loiter": task.rewards.loiter,
            },
            "gamma": task.gamma,
            "t_max": task.t_max,
            "mg_pursue_prob": task.mg_pursue_prob,
        },
        "seed": seed,
    }
    if net.layout is not None:
        doc["network"]["layout"] = {str(v): [x, y] for v, (x, y) in sorted(net.layout.items())}
    return doc


def task_from_doc(doc: dict) -> tuple[DeliveryTask, int]:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InvalidTask(f"unsupported schema_version {doc.get('schema_version')!r}")
    netd = doc["network"]
    layout = None
    if "layout" in netd:
        layout = {int(v): (float(x), float(y)) for v, (x, y) in netd["layout"].items()}
    net = RoadNetwork(
        n=int(netd["n"]),
        edges=_canonical_edges(tuple((int(a), int(b)) for a, b in netd["edges"])),
        generator=netd.get("generator", "manual"),
        layout=layout,
    )
    t = doc["task"]
    task = DeliveryTask(
        network=net,
        adt_start=int(t["adt_start"]),
        mg_start=int(t["mg_start"]),
        goal=int(t["goal"]),
        p_trans=float(t["p_trans"]),
        rewards=Rewards(
            goal=float(t["rewards"]["goal"]),
            caught=float(t["rewards"]["caught"]),
            loiter=float(t["rewards"]["loiter"]),
        ),
        gamma=float(t["gamma"]),
        t_max=int(t["t_max"]),
        mg_pursue_prob=float(t["mg_pursue_prob"]),
    )
    return task, int(doc.get("seed", 0))


def save_task(task: DeliveryTask, path, seed: int = 0) -> None:
    with open(path, "w") as fh:
        json.dump(task_to_doc(task, seed), fh, indent=2)
        fh.write("\n")


def load_task(path) -> tuple[DeliveryTask, int]:
    with open(path) as fh:
        return task_from_doc(json.load(fh))


@dataclass
class SampleStats:
    """Rejection accounting for random task sampling."""

    generated: int = 0
    accepted: int = 0
    rejections: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.rejections[reason] = self.rejections.get(reason, 0) + 1


def draw_task(
    rng_seed: int,
    n_range: tuple[int, int] = (8, 35),
    p_trans_range: tuple[float, float] = (0.0, 1.0),
    rewards: Rewards = Rewards(),
    gamma: float = 0.95,
    t_max: int = 50,
    mg_pursue_prob: float = 0.7,
) -> DeliveryTask:
    """One raw random task draw (connected network, unfiltered placement).

    Mirrors the dataset procedure: uniform node count, uniform choice of
    generator model, uniform random role placement.  Admissibility is not
    checked here; callers filter and account for rejections themselves.
    """
    kinds = [k for k in GENERATOR_TAGS if k != "manual"]
    rng = Random(mix64(rng_seed, 0xD12A))
    n = rng.randint(*n_range)
    kind = kinds[rng.randrange(len(kinds))]
    net = generate_network(kind, n, rng_seed=mix64(rng_seed, 0xD12A, 1))
    nodes = list(range(n))
    adt, mg = rng.sample(nodes, 2)
    goal = rng.randrange(n)
    if goal == adt:
        goal = (goal + 1) % n
    return DeliveryTask(
        network=net,
        adt_start=adt,
        mg_start=mg,
        goal=goal,
        p_trans=rng.uniform(*p_trans_range),
        rewards=rewards,
        gamma=gamma,
        t_max=t_max,
        mg_pursue_prob=mg_pursue_prob,
    )


def sample_task(
    rng_seed: int,
    n_range: tuple[int, int] = (8, 35),
    p_trans_range: tuple[float, float] = (0.0, 1.0),
    rewards: Rewards = Rewards(),
    gamma: float = 0.95,
    t_max: int = 50,
    mg_pursue_prob: float = 0.7,
    stats: SampleStats | None = None,
    max_attempts: int = 500,
) -> DeliveryTask:
    """Draw tasks until one passes the admissibility filter.

    Rejected draws are tallied by reason in ``stats``.
    """
    for attempt in range(max_attempts):
        sub = mix64(rng_seed, 0x7A5C, attempt)
        try:
            task = draw_task(
                sub,
                n_range=n_range,
                p_trans_range=p_trans_range,
                rewards=rewards,
                gamma=gamma,
                t_max=t_max,
                mg_pursue_prob=mg_pursue_prob,
            )
        except GenerationFailed:
            if stats:
                stats.generated += 1
                stats.reject("generation failed")
            continue
        if stats:
            stats.generated += 1
        ok, reason = admissible_task(task)
        if ok:
            if stats:
                stats.accepted += 1
            return task
        if stats:
            stats.reject(reason or "rejected")
    raise GenerationFailed(f"no admissible task in {max_attempts} attempts")
