"""Atomic look-compute-move execution with seeded schedulers and adversaries.

A step activates a set of robots; all of them compute on the same snapshot,
coins resolve try-moves independently per robot, an adversary callback picks
edges for symmetric-view movers, and all resulting moves land simultaneously.
Robots are anonymous to the protocol but the engine keeps per-robot positions
so that schedulers can be fair to individual robots and traces are replayable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from . import protocol as default_protocol
from .ring import Configuration, as_config, format_config, has_tower, occupied_nodes, parse_config

DecideFn = Callable[[Configuration, int], "default_protocol.Decision"]
Adversary = Callable[[int, Configuration, tuple[int, int]], int]

DEFAULT_MAX_STEPS = 10**6


class SchedulerError(Exception):
    pass


# ---------------------------------------------------------------------------
# Adversaries
# ---------------------------------------------------------------------------

class SeededAdversary:
    """Resolves symmetric-view edge choices uniformly from a seeded RNG."""

    def __init__(self, rng: random.Random):
        self.rng = rng

    def __call__(self, robot: int, config: Configuration, options: tuple[int, int]) -> int:
        return options[self.rng.randrange(2)]


class ScriptedAdversary:
    """Replays a fixed sequence of edge choices; raises when exhausted."""

    def __init__(self, choices: Iterable[int]):
        self._choices = list(choices)
        self._next = 0

    def __call__(self, robot: int, config: Configuration, options: tuple[int, int]) -> int:
        if self._next >= len(self._choices):
            raise SchedulerError("scripted adversary exhausted")
        choice = self._choices[self._next]
        self._next += 1
        if choice not in options:
            raise SchedulerError(f"scripted edge {choice} not among options {options}")
        return choice


# ---------------------------------------------------------------------------
# Scheduler policies
# ---------------------------------------------------------------------------

ROUND_ROBIN = "round-robin"
SEQUENTIAL_RANDOM = "sequential-random"
RANDOM_SUBSET = "random-subset"
SCRIPTED = "scripted"

POLICY_NAMES = (ROUND_ROBIN, SEQUENTIAL_RANDOM, RANDOM_SUBSET, SCRIPTED)


@dataclass(frozen=True)
class SchedulerPolicy:
    """Activation rule.  The built-in infinite modes are fair: round-robin by
    construction, the random modes with probability 1.  Scripted runs end when
    the script does and only promise non-empty activations."""

    mode: str
    script: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in POLICY_NAMES:
            raise ValueError(f"unknown scheduler mode {self.mode!r}")

    @property
    def sequential(self) -> bool:
        if self.mode in (ROUND_ROBIN, SEQUENTIAL_RANDOM):
            return True
        if self.mode == SCRIPTED:
            return all(len(a) == 1 for a in self.script)
        return False

    def activation(self, t: int, k: int, rng: random.Random) -> Optional[tuple[int, ...]]:
        """Robot ids to activate at instant t; None when a script runs out."""
        if self.mode == ROUND_ROBIN:
            return (t % k,)
        if self.mode == SEQUENTIAL_RANDOM:
            return (rng.randrange(k),)
        if self.mode == RANDOM_SUBSET:
            mask = rng.randrange(1, 1 << k)
            return tuple(r for r in range(k) if mask >> r & 1)
        if t >= len(self.script):
            return None
        return tuple(self.script[t])


def policy_from_name(name: str) -> SchedulerPolicy:
    return SchedulerPolicy(name)


# ---------------------------------------------------------------------------
# Step records and traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    """One atomic step, fully resolved: who was activated, where everyone
    stood, every coin toss, and every adversary edge choice."""

    t: int
    activated: tuple[int, ...]
    positions_before: tuple[int, ...]
    before: Configuration
    after: Configuration
    coins: dict[int, bool] = field(default_factory=dict)
    adversary_edges: dict[int, int] = field(default_factory=dict)

    @property
    def activation_nodes(self) -> dict[int, int]:
        """Activated robots grouped by node (count per node)."""
        out: dict[int, int] = {}
        for r in self.activated:
            node = self.positions_before[r]
            out[node] = out.get(node, 0) + 1
        return out

    @property
    def changed(self) -> bool:
        return self.before != self.after

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "activated": list(self.activated),
            "coins": {str(r): v for r, v in sorted(self.coins.items())},
            "adversary": {str(r): v for r, v in sorted(self.adversary_edges.items())},
            "config": format_config(self.after),
        }


@dataclass
class Trace:
    n: int
    k: int
    policy: str
    seed: Optional[int]
    initial: Configuration
    steps: list[StepRecord]
    visited: frozenset[int]
    terminated: bool

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def full_coverage(self) -> bool:
        return len(self.visited) == self.n

    def configurations(self) -> list[Configuration]:
        return [self.initial] + [s.after for s in self.steps]

    def header(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "policy": self.policy,
            "initial": format_config(self.initial),
        }


def trace_to_jsonl(trace: Trace) -> list[str]:
    """Header line then one line per step."""
    lines = [json.dumps(trace.header())]
    lines.extend(json.dumps(s.to_json()) for s in trace.steps)
    return lines


def read_trace_jsonl(lines: Iterable[str]) -> tuple[dict, list[dict]]:
    rows = [json.loads(line) for line in lines if line.strip()]
    if not rows:
        raise ValueError("empty trace")
    header, steps = rows[0], rows[1:]
    for key in ("n", "k", "seed", "policy"):
        if key not in header:
            raise ValueError(f"trace header missing {key!r}")
    return header, steps


def trace_configurations(header: dict, steps: list[dict]) -> list[Configuration]:
    configs = [parse_config(header["initial"])]
    configs.extend(parse_config(s["config"]) for s in steps)
    return configs


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

class Simulation:
    """Mutable run state: per-robot positions plus visited-node bookkeeping."""

    def __init__(
        self,
        initial: Sequence[int],
        decide: DecideFn = default_protocol.decide,
        rng: Optional[random.Random] = None,
        adversary: Optional[Adversary] = None,
    ):
        c = as_config(initial)
        self.n = len(c)
        self.decide = decide
        self.rng = rng if rng is not None else random.Random()
        self.adversary = adversary if adversary is not None else SeededAdversary(self.rng)
        self.positions: list[int] = []
        for node, count in enumerate(c):
            self.positions.extend([node] * count)
        self.k = len(self.positions)
        self.visited: set[int] = set(occupied_nodes(c))
        self.t = 0

    def configuration(self) -> Configuration:
        counts = [0] * self.n
        for p in self.positions:
            counts[p] += 1
        return tuple(counts)

    def is_terminal(self) -> bool:
        return is_terminal(self.configuration(), self.decide)

    def step(self, activated: Iterable[int]) -> StepRecord:
        acts = tuple(sorted(set(activated)))
        if not acts:
            raise SchedulerError("scheduler violated nonemptiness")
        if any(not 0 <= r < self.k for r in acts):
            raise ValueError(f"robot id out of range in activation {acts}")
        before = self.configuration()
        positions_before = tuple(self.positions)
        coins: dict[int, bool] = {}
        adversary_edges: dict[int, int] = {}
        moves: dict[int, int] = {}
        for r in acts:
            node = self.positions[r]
            decision = self.decide(before, node)
            if decision.kind == default_protocol.IDLE:
                continue
            if decision.kind == default_protocol.TRY_MOVE:
                win = self.rng.random() < 0.5
                coins[r] = win
                if not win:
                    continue
            if decision.adversary:
                options = ((node - 1) % self.n, (node + 1) % self.n)
                choice = self.adversary(r, before, options)
                if choice not in options:
                    raise ValueError(f"adversary returned {choice}, not an incident edge")
                adversary_edges[r] = choice
                target = choice
            else:
                target = decision.target
                assert target is not None
            moves[r] = target
        for r, target in moves.items():
            self.positions[r] = target
        after = self.configuration()
        self.visited.update(occupied_nodes(after))
        record = StepRecord(self.t, acts, positions_before, before, after, coins, adversary_edges)
        self.t += 1
        return record


def is_terminal(c: Sequence[int], decide: DecideFn = default_protocol.decide) -> bool:
    """No robot moves with positive probability: every decision is idle."""
    c = as_config(c)
    return all(not decide(c, i).moves for i in occupied_nodes(c))


def step(
    c: Sequence[int],
    activated: Iterable[int],
    rng: random.Random,
    adversary: Optional[Adversary] = None,
    decide: DecideFn = default_protocol.decide,
) -> StepRecord:
    """One-shot step on a bare configuration (robot ids in node order)."""
    sim = Simulation(c, decide, rng, adversary)
    return sim.step(activated)


def run(
    initial: Sequence[int],
    policy: SchedulerPolicy,
    *,
    seed: Optional[int] = None,
    rng: Optional[random.Random] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    decide: DecideFn = default_protocol.decide,
    adversary: Optional[Adversary] = None,
    require_towerless: bool = True,
) -> Trace:
    """Iterate steps until terminal or max_steps.

    ``require_towerless`` enforces the problem's initial condition; pass False
    to replay from a mid-run snapshot such as an arrow.
    """
    c = as_config(initial)
    if require_towerless and has_tower(c):
        raise ValueError("initial configuration must be towerless")
    if rng is None:
        rng = random.Random(seed)
    sim = Simulation(c, decide, rng, adversary)
    steps: list[StepRecord] = []
    terminated = False
    while True:
        if sim.is_terminal():
            terminated = True
            break
        if sim.t >= max_steps:
            break
        activation = policy.activation(sim.t, sim.k, rng)
        if activation is None:
            break
        steps.append(sim.step(activation))
    return Trace(
        n=sim.n,
        k=sim.k,
        policy=policy.mode,
        seed=seed,
        initial=c,
        steps=steps,
        visited=frozenset(sim.visited),
        terminated=terminated,
    )


def mrp(trace_or_configs) -> list[Configuration]:
    """Minimal relevant prefix: the configuration sequence with consecutive
    duplicates collapsed."""
    if isinstance(trace_or_configs, Trace):
        configs = trace_or_configs.configurations()
    else:
        configs = [as_config(c) for c in trace_or_configs]
    out: list[Configuration] = []
    for c in configs:
        if not out or out[-1] != c:
            out.append(c)
    return out


def sample_towerless(n: int, k: int, rng: random.Random) -> Configuration:
    """Uniform draw over the C(n, k) towerless configurations."""
    if k > n:
        raise ValueError(f"cannot place {k} robots on {n} nodes without a tower")
    nodes = rng.sample(range(n), k)
    c = [0] * n
    for node in nodes:
        c[node] = 1
    return tuple(c)
