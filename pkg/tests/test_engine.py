"""Execution semantics: atomic steps, schedulers, adversaries, traces, JSONL."""

import json
import random

import pytest

from ring_explorer import engine
from ring_explorer.engine import (
    SchedulerError,
    SchedulerPolicy,
    ScriptedAdversary,
    Simulation,
    is_terminal,
    mrp,
    read_trace_jsonl,
    run,
    sample_towerless,
    trace_configurations,
    trace_to_jsonl,
)
from ring_explorer.ring import canonical_form, is_final_arrow


class ScriptedCoins:
    """Coin stub: random() replays scripted values, nothing else is allowed."""

    def __init__(self, values):
        self._values = list(values)

    def random(self):
        return self._values.pop(0)

    def __getattr__(self, name):
        raise AssertionError(f"unexpected rng use: {name}")


class TestStep:
    def test_tail_move(self):
        sim = Simulation((1, 0, 2, 1, 0, 0, 0, 0, 0))
        record = sim.step([0])  # robot 0 sits on node 0, the tail
        assert record.after == (0, 0, 2, 1, 0, 0, 0, 0, 1)
        assert record.activation_nodes == {0: 1}

    def test_phase2_swap_is_identity(self):
        sim = Simulation((1, 1, 1, 1, 0, 0, 0, 0, 0), rng=ScriptedCoins([0.0, 0.0]))
        record = sim.step([1, 2])  # both inner robots win their coins
        assert record.after == record.before
        assert record.coins == {1: True, 2: True}

    def test_phase2_single_winner_forms_arrow(self):
        sim = Simulation((1, 1, 1, 1, 0, 0, 0, 0, 0), rng=ScriptedCoins([0.0, 0.9]))
        record = sim.step([1, 2])
        assert record.after == (1, 0, 2, 1, 0, 0, 0, 0, 0)
        assert record.coins == {1: True, 2: False}

    def test_conservation(self):
        rng = random.Random(5)
        for _ in range(300):
            c = sample_towerless(11, 4, rng)
            sim = Simulation(c, rng=rng)
            activation = rng.sample(range(4), rng.randint(1, 4))
            record = sim.step(activation)
            assert sum(record.after) == 4

    def test_empty_activation_rejected(self):
        sim = Simulation((1, 1, 1, 1, 0, 0, 0, 0, 0))
        with pytest.raises(SchedulerError, match="nonemptiness"):
            sim.step([])

    def test_one_shot_step_helper(self):
        record = engine.step((1, 0, 2, 1, 0, 0, 0, 0, 0), [0], random.Random(0))
        assert record.after == (0, 0, 2, 1, 0, 0, 0, 0, 1)
        assert record.positions_before == (0, 2, 2, 3)

    def test_tower_robots_share_decision_but_not_coins(self):
        # Both robots of a 4-segment's inner pair: distinct coins recorded.
        sim = Simulation((1, 1, 1, 1, 0, 0, 0, 0, 0), rng=ScriptedCoins([0.9, 0.9]))
        record = sim.step([1, 2])
        assert record.after == record.before
        assert record.coins == {1: False, 2: False}


class TestIsTerminal:
    def test_final_arrow_terminal(self):
        assert is_terminal((2, 1, 1, 0, 0, 0, 0, 0, 0))

    def test_four_segment_not_terminal(self):
        assert not is_terminal((1, 1, 1, 1, 0, 0, 0, 0, 0))

    def test_arrow_not_terminal(self):
        assert not is_terminal((1, 0, 2, 1, 0, 0, 0, 0, 0))


class TestRun:
    def test_tail_walk_needs_exactly_five_moves(self):
        trace = run(
            (1, 0, 2, 1, 0, 0, 0, 0, 0),
            SchedulerPolicy("round-robin"),
            seed=7,
            require_towerless=False,
        )
        assert trace.terminated
        moves = [s for s in trace.steps if s.changed]
        assert len(moves) == 5  # n - 4
        assert is_final_arrow(trace.configurations()[-1])
        assert len(mrp(trace)) == 6
        # The hole inside the starting arrow is never entered on this walk.
        assert trace.visited == frozenset(range(9)) - {1}

    def test_random_subset_run_terminates_with_coverage(self):
        trace = run((1, 1, 1, 1, 0, 0, 0, 0, 0), SchedulerPolicy("random-subset"), seed=1)
        assert trace.terminated
        assert trace.full_coverage

    def test_max_steps_zero(self):
        trace = run((1, 1, 1, 1, 0, 0, 0, 0, 0), SchedulerPolicy("round-robin"), seed=0, max_steps=0)
        assert trace.step_count == 0
        assert trace.terminated == is_terminal(trace.initial)
        assert not trace.terminated

    def test_towered_initial_rejected(self):
        with pytest.raises(ValueError, match="towerless"):
            run((1, 0, 2, 1, 0, 0, 0, 0, 0), SchedulerPolicy("round-robin"), seed=0)

    def test_reproducible_bit_for_bit(self):
        kwargs = dict(seed=123, max_steps=50_000)
        a = run(sample_towerless(10, 4, random.Random(9)), SchedulerPolicy("random-subset"), **kwargs)
        b = run(sample_towerless(10, 4, random.Random(9)), SchedulerPolicy("random-subset"), **kwargs)
        assert trace_to_jsonl(a) == trace_to_jsonl(b)
        assert a.steps == b.steps

    def test_scripted_policy_and_adversary(self):
        # Isolated robot of a 3-segment with equal holes moves where the
        # adversary says.
        c = (1, 1, 1, 0, 0, 0, 1, 0, 0, 0)
        policy = SchedulerPolicy("scripted", script=((3,),))
        trace = run(c, policy, seed=0, adversary=ScriptedAdversary([5]))
        assert trace.steps[0].after == (1, 1, 1, 0, 0, 1, 0, 0, 0, 0)
        assert trace.steps[0].adversary_edges == {3: 5}
        assert not trace.terminated  # script exhausted before terminal


class TestPolicies:
    def test_round_robin_is_fair_windowed(self):
        policy = SchedulerPolicy("round-robin")
        rng = random.Random(0)
        for start in range(0, 40, 4):
            window = [policy.activation(t, 4, rng)[0] for t in range(start, start + 4)]
            assert sorted(window) == [0, 1, 2, 3]

    def test_random_subset_nonempty_and_balanced(self):
        policy = SchedulerPolicy("random-subset")
        rng = random.Random(42)
        counts = [0] * 4
        trials = 3000
        for t in range(trials):
            activation = policy.activation(t, 4, rng)
            assert activation
            for r in activation:
                counts[r] += 1
        expected = trials * 8 / 15  # P(robot in a uniform nonempty subset)
        sigma = (trials * (8 / 15) * (7 / 15)) ** 0.5
        for count in counts:
            assert abs(count - expected) < 4 * sigma

    def test_sequential_flags(self):
        assert SchedulerPolicy("round-robin").sequential
        assert SchedulerPolicy("sequential-random").sequential
        assert not SchedulerPolicy("random-subset").sequential
        assert SchedulerPolicy("scripted", script=((0,), (2,))).sequential
        assert not SchedulerPolicy("scripted", script=((0, 1),)).sequential

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            SchedulerPolicy("alphabetical")


class TestMrp:
    def test_collapse(self):
        a, b = (1, 1, 1, 1, 0, 0, 0, 0, 0), (1, 0, 2, 1, 0, 0, 0, 0, 0)
        assert mrp([a, a, b, b, a]) == [a, b, a]

    def test_all_identical(self):
        a = (1, 1, 1, 1, 0, 0, 0, 0, 0)
        assert mrp([a] * 7) == [a]

    def test_sequential_terminating_run_length_bound(self):
        for seed in range(5):
            rng = random.Random(seed)
            trace = run(sample_towerless(9, 4, rng), SchedulerPolicy("round-robin"), rng=rng)
            assert trace.terminated
            assert len(mrp(trace)) >= 6  # n - k + 1


class TestSampleTowerless:
    def test_forced_full_ring(self):
        assert sample_towerless(4, 4, random.Random(0)) == (1, 1, 1, 1)

    def test_always_towerless(self):
        rng = random.Random(7)
        for _ in range(10_000):
            c = sample_towerless(9, 4, rng)
            assert sum(c) == 4 and max(c) == 1

    def test_too_many_robots(self):
        with pytest.raises(ValueError):
            sample_towerless(3, 4, random.Random(0))

    def test_class_frequencies_match_uniform_subsets(self):
        import itertools
        from math import comb

        n, k, draws = 9, 4, 10_000
        class_sizes = {}
        for nodes in itertools.combinations(range(n), k):
            c = tuple(1 if i in nodes else 0 for i in range(n))
            key = canonical_form(c)
            class_sizes[key] = class_sizes.get(key, 0) + 1
        rng = random.Random(2024)
        observed = {key: 0 for key in class_sizes}
        for _ in range(draws):
            observed[canonical_form(sample_towerless(n, k, rng))] += 1
        total = comb(n, k)
        for key, size in class_sizes.items():
            p = size / total
            sigma = (draws * p * (1 - p)) ** 0.5
            assert abs(observed[key] - draws * p) <= 3 * sigma, key


class TestJsonl:
    def test_header_and_step_lines(self):
        trace = run((1, 1, 1, 1, 0, 0, 0, 0, 0), SchedulerPolicy("random-subset"), seed=11)
        lines = trace_to_jsonl(trace)
        header = json.loads(lines[0])
        assert header == {
            "n": 9, "k": 4, "seed": 11, "policy": "random-subset",
            "initial": "1,1,1,1,0,0,0,0,0",
        }
        assert len(lines) == 1 + trace.step_count
        step = json.loads(lines[1])
        assert set(step) == {"t", "activated", "coins", "adversary", "config"}

    def test_round_trip(self):
        trace = run((1, 1, 1, 1, 0, 0, 0, 0, 0), SchedulerPolicy("random-subset"), seed=11)
        header, steps = read_trace_jsonl(trace_to_jsonl(trace))
        assert trace_configurations(header, steps) == trace.configurations()

    def test_missing_header_key(self):
        with pytest.raises(ValueError, match="header"):
            read_trace_jsonl(['{"n": 9}'])
