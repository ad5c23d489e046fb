"""Command-line entry point.

Subcommands: ``simulate`` (one seeded run, JSONL trace), ``campaign``
(Monte-Carlo termination/coverage statistics, JSON), ``verify`` (exhaustive
one-step checks plus trace bounds), ``count`` (tower-class counting), and
``impossible`` (the three-robot refutation report).  Identical invocations
with identical seeds produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Optional

from . import impossibility, verify
from .engine import POLICY_NAMES, SCRIPTED, SchedulerPolicy, run, sample_towerless, trace_to_jsonl
from .ring import parse_config

ENV_THREADS = "RING_EXPLORER_THREADS"


def _thread_cap() -> Optional[int]:
    raw = os.environ.get(ENV_THREADS)
    if not raw:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise SystemExit(f"{ENV_THREADS} must be an integer, got {raw!r}")
    return max(1, cap)


def _effective_jobs(requested: int) -> int:
    cap = _thread_cap()
    return max(1, min(requested, cap) if cap is not None else requested)


def _policy(name: str) -> SchedulerPolicy:
    if name == SCRIPTED:
        raise SystemExit("scripted schedules are available through the library API only")
    return SchedulerPolicy(name)


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text + "\n")
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _add_common(parser: argparse.ArgumentParser, default_n: int = 9) -> None:
    parser.add_argument("--n", type=int, default=default_n, help="ring size")
    parser.add_argument("--seed", type=int, default=0, help="master seed (recorded in output)")
    parser.add_argument("--output", default=None, help="write to file instead of stdout")


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.n <= 8 or args.k != 4:
        raise SystemExit(f"simulate needs k=4 and n>8 (got k={args.k}, n={args.n})")
    rng = random.Random(args.seed)
    if args.initial == "random":
        initial = sample_towerless(args.n, args.k, rng)
    else:
        initial = parse_config(args.initial)
        if len(initial) != args.n:
            raise SystemExit(f"--initial has {len(initial)} nodes but --n is {args.n}")
        if sum(initial) != args.k:
            raise SystemExit(f"--initial holds {sum(initial)} robots but --k is {args.k}")
    # An explicit --initial may be a mid-protocol snapshot (e.g. an arrow);
    # only randomly sampled starts are forced to be towerless.
    trace = run(
        initial,
        _policy(args.policy),
        seed=args.seed,
        rng=rng,
        max_steps=args.max_steps,
        require_towerless=args.initial == "random",
    )
    _emit("\n".join(trace_to_jsonl(trace)), args.output)
    return 0 if trace.terminated else 1


def _cmd_campaign(args: argparse.Namespace) -> int:
    if args.n <= 8:
        raise SystemExit(f"campaign needs n>8 (got n={args.n})")
    stats = verify.campaign(
        args.n, args.trials, _policy(args.policy), args.seed, max_steps=args.max_steps
    )
    _emit(json.dumps(stats.to_json(), indent=2), args.output)
    ok = stats.terminated_count == args.trials and stats.full_coverage_count == args.trials
    return 0 if ok else 1


def _cmd_verify(args: argparse.Namespace) -> int:
    if args.n <= 8:
        raise SystemExit(f"verify needs n>8 (got n={args.n})")
    reports = [
        verify.check_no_tower_one_step(args.n),
        verify.check_four_segment_step(args.n),
        verify.check_phase3_monotone(args.n),
    ]
    mrp_report = _mrp_batch(args.n, args.traces, args.seed)
    reports.append(mrp_report)
    lines = []
    all_passed = True
    for report in reports:
        all_passed &= report.passed
        lines.append(json.dumps(report.to_json()))
        print(f"{'PASS' if report.passed else 'FAIL'} {report.claim} "
              f"({report.instances_checked} instances)", file=sys.stderr)
    _emit("\n".join(lines), args.output)
    return 0 if all_passed else 1


def _mrp_batch(n: int, traces: int, seed: int) -> verify.CheckReport:
    batch = verify.CheckReport(claim="mrp-lower-bounds", details={"n": n, "traces": traces})
    master = random.Random(seed)
    for _ in range(traces):
        rng = random.Random(master.randrange(2**63))
        initial = sample_towerless(n, 4, rng)
        trace = run(initial, SchedulerPolicy("round-robin"), rng=rng, max_steps=100_000)
        if not trace.terminated:
            batch.violations.append({"reason": "run did not terminate"})
            continue
        report = verify.check_mrp_bounds(trace)
        batch.instances_checked += report.instances_checked
        batch.violations.extend(report.violations)
    return batch


def _cmd_count(args: argparse.Namespace) -> int:
    n_max = args.n_max if args.n_max is not None else args.n
    if n_max < args.n:
        raise SystemExit("--n-max must be at least --n")
    rows = [(n, args.k, verify.count_tower_classes(n, args.k)) for n in range(args.n, n_max + 1)]
    if len(rows) == 1 and args.n_max is None:
        _emit(str(rows[0][2]), args.output)
    else:
        lines = ["n\tk\tclasses"] + [f"{n}\t{k}\t{count}" for n, k, count in rows]
        _emit("\n".join(lines), args.output)
    return 0


def _cmd_impossible(args: argparse.Namespace) -> int:
    modes = ("distributed", "sequential") if args.mode == "both" else (args.mode,)
    jobs = _effective_jobs(args.jobs)
    report = impossibility.theorem2_report(modes=modes, jobs=jobs)
    _emit(json.dumps(report, indent=2), args.output)
    ok = True
    for mode in modes:
        unrefuted = report["modes"][mode]["unrefuted"]
        ok &= (unrefuted == 0) if mode == "distributed" else (unrefuted >= 1)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ring-explorer",
        description="Simulate and verify ring exploration by four oblivious robots, "
                    "and refute all three-robot protocols on a four-node ring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one seeded run, JSONL trace output")
    _add_common(p)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--initial", default="random",
                   help='comma-separated multiplicities or "random"')
    p.add_argument("--policy", choices=[m for m in POLICY_NAMES if m != SCRIPTED],
                   default="round-robin")
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("campaign", help="Monte-Carlo termination/coverage statistics")
    _add_common(p)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--policy", choices=[m for m in POLICY_NAMES if m != SCRIPTED],
                   default="random-subset")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("verify", help="exhaustive one-step checks and trace bounds")
    _add_common(p)
    p.add_argument("--traces", type=int, default=25,
                   help="sequential runs fed through the MRP bounds")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("count", help="tower-bearing configuration classes")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("impossible", help="three-robot refutation report (n=4, k=3)")
    p.add_argument("--mode", choices=["distributed", "sequential", "both"], default="both")
    p.add_argument("--jobs", type=int, default=1,
                   help=f"worker processes (capped by ${ENV_THREADS})")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_impossible)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
