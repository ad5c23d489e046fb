"""Mechanical checkers for the protocol's finite claims.

Exhaustive one-step checks (no tower creation, 4-segment successors, arrow
growth), lower bounds on the collapsed configuration sequence of sequential
terminating runs, counting of tower-bearing configuration classes, and
seeded Monte-Carlo exploration campaigns with per-step invariant monitoring.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Optional

from . import protocol as default_protocol
from .engine import (
    DecideFn,
    SchedulerPolicy,
    StepRecord,
    Trace,
    mrp,
    run,
    sample_towerless,
)
from .ring import (
    Configuration,
    canonical_form,
    find_arrow,
    format_config,
    has_tower,
    is_final_arrow,
    is_towerless,
    occupied_nodes,
    segments,
)

PROTOCOL_K = 4


class InvariantViolation(Exception):
    """A monitored run broke a structural invariant."""


@dataclass
class CheckReport:
    claim: str
    instances_checked: int = 0
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "instances_checked": self.instances_checked,
            "passed": self.passed,
            "violations": [_violation_json(v) for v in self.violations[:10]],
            "violation_count": len(self.violations),
            "details": self.details,
        }


def _violation_json(v) -> dict:
    if isinstance(v, StepRecord):
        return v.to_json() | {"before": format_config(v.before)}
    if isinstance(v, dict):
        return {k: (format_config(x) if isinstance(x, tuple) else x) for k, x in v.items()}
    return {"detail": str(v)}


# ---------------------------------------------------------------------------
# Exhaustive one-step checks
# ---------------------------------------------------------------------------

def _resolution_options(c: Configuration, node: int, decide: DecideFn) -> list[Optional[int]]:
    """All positive-probability outcomes for one activated robot: None = stays,
    otherwise the node it moves to."""
    n = len(c)
    d = decide(c, node)
    edges = [(node - 1) % n, (node + 1) % n]
    if d.kind == default_protocol.IDLE:
        return [None]
    targets = edges if d.adversary else [d.target]
    if d.kind == default_protocol.MOVE:
        return list(targets)
    return [None] + list(targets)


def _resolved_record(
    c: Configuration,
    robots: tuple[int, ...],
    activation: tuple[int, ...],
    resolution: tuple[Optional[int], ...],
    decide: DecideFn,
) -> StepRecord:
    """Materialize one fully resolved branch as a replayable step record."""
    positions = list(robots)
    coins: dict[int, bool] = {}
    adversary: dict[int, int] = {}
    for r, outcome in zip(activation, resolution):
        node = robots[r]
        d = decide(c, node)
        if d.kind == default_protocol.TRY_MOVE:
            coins[r] = outcome is not None
        if outcome is not None and d.adversary:
            adversary[r] = outcome
        if outcome is not None:
            positions[r] = outcome
    counts = [0] * len(c)
    for p in positions:
        counts[p] += 1
    return StepRecord(
        t=0,
        activated=activation,
        positions_before=robots,
        before=c,
        after=tuple(counts),
        coins=coins,
        adversary_edges=adversary,
    )


def _iter_resolutions(option_lists: list[list[Optional[int]]]):
    if not option_lists:
        yield ()
        return
    for head in option_lists[0]:
        for rest in _iter_resolutions(option_lists[1:]):
            yield (head,) + rest


def check_no_tower_one_step(n: int, decide: DecideFn = default_protocol.decide) -> CheckReport:
    """For every towerless 4-robot configuration without a 4-segment, every
    nonempty activation, coin vector, and adversary resolution: the successor
    is towerless.  Exhaustive."""
    if n <= 8:
        raise ValueError("protocol domain starts at n=9")
    report = CheckReport(claim="no-tower-after-one-step")
    base = skipped = 0
    for nodes in combinations(range(n), PROTOCOL_K):
        base += 1
        c = tuple(1 if i in nodes else 0 for i in range(n))
        if any(s.length == 4 for s in segments(c)):
            skipped += 1
            continue
        options = {node: _resolution_options(c, node, decide) for node in nodes}
        for size in range(1, PROTOCOL_K + 1):
            for subset in combinations(range(PROTOCOL_K), size):
                lists = [options[nodes[r]] for r in subset]
                for resolution in _iter_resolutions(lists):
                    report.instances_checked += 1
                    landed = list(nodes)
                    for r, outcome in zip(subset, resolution):
                        if outcome is not None:
                            landed[r] = outcome
                    if len(set(landed)) != PROTOCOL_K:
                        report.violations.append(
                            _resolved_record(c, nodes, subset, resolution, decide)
                        )
    report.details = {
        "n": n,
        "base_configurations": base,
        "four_segments_skipped": skipped,
        "configurations_checked": base - skipped,
    }
    return report


def check_four_segment_step(n: int, decide: DecideFn = default_protocol.decide) -> CheckReport:
    """Every successor of a 4-segment configuration is that configuration or
    the primary arrow on the same four nodes.  Exhaustive over placements,
    activations, and coin vectors."""
    if n <= 8:
        raise ValueError("protocol domain starts at n=9")
    report = CheckReport(claim="four-segment-successors")
    for start in range(n):
        nodes = tuple((start + j) % n for j in range(4))
        c = tuple(1 if i in nodes else 0 for i in range(n))
        robots = tuple(sorted(nodes))
        segment_set = set(nodes)
        options = {node: _resolution_options(c, node, decide) for node in robots}
        for size in range(1, PROTOCOL_K + 1):
            for subset in combinations(range(PROTOCOL_K), size):
                lists = [options[robots[r]] for r in subset]
                for resolution in _iter_resolutions(lists):
                    report.instances_checked += 1
                    record = _resolved_record(c, robots, subset, resolution, decide)
                    ok = record.after == c
                    if not ok:
                        arrow = find_arrow(record.after)
                        ok = (
                            arrow is not None
                            and arrow.size == 1
                            and set(arrow.path_nodes(n)) == segment_set
                        )
                    if not ok:
                        report.violations.append(record)
    report.details = {"n": n, "placements": n}
    return report


def _arrow_config(n: int, tower: int, orientation: int, size: int) -> Configuration:
    c = [0] * n
    c[tower] = 2
    c[(tower + orientation) % n] = 1
    c[(tower - orientation * (size + 1)) % n] = 1
    return tuple(c)


def check_phase3_monotone(n: int, decide: DecideFn = default_protocol.decide) -> CheckReport:
    """From every non-final arrow, activating the tail grows the arrow by
    exactly one; non-tail activations change nothing; and a primary arrow
    reaches the terminal shape in exactly n-4 tail moves."""
    if n <= 8:
        raise ValueError("protocol domain starts at n=9")
    report = CheckReport(claim="arrow-growth")
    for tower in range(n):
        for orientation in (1, -1):
            for size in range(1, n - 3):
                c = _arrow_config(n, tower, orientation, size)
                arrow = find_arrow(c)
                report.instances_checked += 1
                if arrow is None or arrow.size != size or arrow.tower != tower:
                    report.violations.append({"config": c, "reason": "arrow not recognized"})
                    continue
                for node in occupied_nodes(c):
                    d = decide(c, node)
                    if node == arrow.tail:
                        expected = (arrow.tail - arrow.orientation) % n
                        if d.kind != default_protocol.MOVE or d.target != expected:
                            report.violations.append({"config": c, "reason": "tail decision"})
                    elif d.moves:
                        report.violations.append({"config": c, "reason": f"node {node} moves"})
                succ = list(c)
                succ[arrow.tail] -= 1
                succ[(arrow.tail - arrow.orientation) % n] += 1
                grown = find_arrow(tuple(succ))
                if grown is None or grown.size != size + 1 or grown.tower != tower:
                    report.violations.append({"config": c, "reason": "successor not a grown arrow"})
            # Walk the tail from the primary arrow to the terminal shape.
            moves = 0
            c = _arrow_config(n, tower, orientation, 1)
            while not is_final_arrow(c) and moves <= n:
                arrow = find_arrow(c)
                if arrow is None:
                    break  # the walk destroyed the arrow: counted as a violation below
                d = decide(c, arrow.tail)
                succ = list(c)
                succ[arrow.tail] -= 1
                succ[d.target] += 1
                c = tuple(succ)
                moves += 1
            report.instances_checked += 1
            if moves != n - 4 or not is_final_arrow(c):
                report.violations.append(
                    {"tower": tower, "orientation": orientation, "moves": moves,
                     "reason": f"expected {n - 4} tail moves"}
                )
    report.details = {"n": n, "tail_moves_to_terminal": n - 4}
    return report


# ---------------------------------------------------------------------------
# Trace bounds
# ---------------------------------------------------------------------------

def has_small_tower(c: Configuration, k: int) -> bool:
    """A tower of fewer than k robots."""
    return any(2 <= v < k for v in c)


def check_mrp_bounds(trace: Trace) -> CheckReport:
    """Lower bounds on the collapsed configuration sequence of a sequential
    terminating run: at least n-k+1 entries in total, with a tower, with a
    tower of fewer than k robots, and pairwise-distinguishable among those."""
    if any(len(s.activated) != 1 for s in trace.steps):
        raise ValueError("lemma applies to sequential computations")
    if not trace.terminated:
        raise ValueError("lemma applies to terminating computations")
    n, k = trace.n, trace.k
    bound = n - k + 1
    prefix = mrp(trace)
    towers = [c for c in prefix if has_tower(c)]
    small = [c for c in prefix if has_small_tower(c, k)]
    distinct = {canonical_form(c) for c in small}
    report = CheckReport(claim="mrp-lower-bounds", instances_checked=4)
    measured = {
        "mrp_length": len(prefix),
        "with_tower": len(towers),
        "with_small_tower": len(small),
        "distinguishable_small_tower": len(distinct),
    }
    for name, value in measured.items():
        if value < bound:
            report.violations.append({"bound": name, "value": value, "required": bound})
    report.details = {"n": n, "k": k, "required": bound, **measured}
    return report


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def count_tower_classes(n: int, k: int = 3) -> int:
    """Number of indistinguishability classes of k-robot configurations that
    contain a tower of fewer than k robots, by brute-force enumeration."""
    classes = set()
    for nodes in combinations_with_replacement(range(n), k):
        c = [0] * n
        for node in nodes:
            c[node] += 1
        c = tuple(c)
        if has_small_tower(c, k):
            classes.add(canonical_form(c))
    return len(classes)


# ---------------------------------------------------------------------------
# Run monitoring and campaigns
# ---------------------------------------------------------------------------

def _classify(c: Configuration) -> tuple[str, object]:
    if is_final_arrow(c):
        return ("final", None)
    arrow = find_arrow(c)
    if arrow is not None:
        return ("arrow", arrow.size)
    if is_towerless(c):
        if any(s.length == 4 for s in segments(c)):
            return ("four-segment", None)
        return ("scatter", None)
    return ("invalid", None)


_ALLOWED = {
    "scatter": {"scatter", "four-segment"},
    "four-segment": {"four-segment", "arrow"},
    "arrow": {"arrow"},
    "final": set(),
}


def check_run_invariants(trace: Trace) -> None:
    """Assert the phase-progression invariants on every step of a run:
    towerless until a 4-segment appears, 4-segment steps stay put or form the
    primary arrow, arrows only ever grow by one, and a terminated run ends in
    the terminal arrow shape.  Raises InvariantViolation."""
    kind, info = _classify(trace.initial)
    if kind == "invalid":
        raise InvariantViolation(f"initial configuration invalid: {trace.initial}")
    for step in trace.steps:
        next_kind, next_info = _classify(step.after)
        if next_kind == "final":
            pass
        elif next_kind not in _ALLOWED[kind]:
            raise InvariantViolation(
                f"step {step.t}: {kind} -> {next_kind} ({format_config(step.before)} -> "
                f"{format_config(step.after)})"
            )
        if kind == "four-segment" and next_kind == "four-segment" and step.after != step.before:
            raise InvariantViolation(f"step {step.t}: 4-segment changed without forming an arrow")
        if kind == "four-segment" and next_kind == "arrow" and next_info != 1:
            raise InvariantViolation(f"step {step.t}: 4-segment formed a non-primary arrow")
        if kind == "arrow" and next_kind == "arrow" and next_info not in (info, info + 1):
            raise InvariantViolation(f"step {step.t}: arrow size {info} -> {next_info}")
        if next_kind == "final" and kind not in ("arrow", "final"):
            raise InvariantViolation(f"step {step.t}: {kind} jumped straight to final arrow")
        kind, info = next_kind, next_info
    if trace.terminated and kind != "final":
        raise InvariantViolation(f"terminated in non-terminal shape {kind}")


@dataclass
class CampaignStats:
    n: int
    trials: int
    terminated_count: int
    full_coverage_count: int
    steps_min: int
    steps_median: float
    steps_mean: float
    steps_max: int
    seed: int
    policy: str
    max_steps: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def campaign(
    n: int,
    trials: int,
    policy: SchedulerPolicy,
    seed: int,
    *,
    max_steps: int = 100_000,
    decide: DecideFn = default_protocol.decide,
) -> CampaignStats:
    """Seeded Monte-Carlo exploration runs from uniform towerless initials.

    Every run is monitored step by step (InvariantViolation on any breach) and
    every terminated sequential run is pushed through the MRP lower bounds.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    master = random.Random(seed)
    trial_seeds = [master.randrange(2**63) for _ in range(trials)]
    terminated = coverage = 0
    step_counts = []
    for trial_seed in trial_seeds:
        rng = random.Random(trial_seed)
        initial = sample_towerless(n, PROTOCOL_K, rng)
        trace = run(initial, policy, rng=rng, max_steps=max_steps, decide=decide)
        check_run_invariants(trace)
        if trace.terminated:
            terminated += 1
            if trace.full_coverage:
                coverage += 1
            if policy.sequential:
                bounds = check_mrp_bounds(trace)
                if not bounds.passed:
                    raise InvariantViolation(
                        f"MRP bounds violated on seed {trial_seed}: {bounds.violations}"
                    )
        step_counts.append(trace.step_count)
    return CampaignStats(
        n=n,
        trials=trials,
        terminated_count=terminated,
        full_coverage_count=coverage,
        steps_min=min(step_counts),
        steps_median=statistics.median(step_counts),
        steps_mean=statistics.fmean(step_counts),
        steps_max=max(step_counts),
        seed=seed,
        policy=policy.mode,
        max_steps=max_steps,
    )


def expected_one_step_instances(n: int, decide: DecideFn = default_protocol.decide) -> int:
    """Independent recount of the no-tower check's instance space via the
    product formula: per configuration, prod(1 + options per robot) - 1."""
    total = 0
    for nodes in combinations(range(n), PROTOCOL_K):
        c = tuple(1 if i in nodes else 0 for i in range(n))
        if any(s.length == 4 for s in segments(c)):
            continue
        product = 1
        for node in nodes:
            product *= 1 + len(_resolution_options(c, node, decide))
        total += product - 1
    return total


def towerless_configuration_count(n: int, k: int = PROTOCOL_K) -> int:
    return comb(n, k)
