"""Command line front end.

Subcommands:

  validate    check an instance file (and optionally a schedule against it)
  solve       run a scheduler on an instance, emit the schedule as JSON
  export-lp   write the linearized model in LP format
  gen         generate a workload instance
  experiment  run a sweep from a spec file, emit a CSV and a summary table

Exit codes for ``solve``: 0 solved, 2 infeasible, 3 unknown (limits hit),
1 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import baselines, io
from .bounds import bound_pair
from .encoder import EncoderConfig, build_fp, build_rp, model_stats, write_lp
from .experiment import ExperimentSpec, format_summary, run_experiment, write_rows_csv
from .generator import GenConfig, gen_onestage_mapreduce, gen_random_dag, gen_simple_mapreduce
from .model import makespan, validate_job
from .solver import FEASIBLE, INFEASIBLE, OPTIMAL, SolverConfig, solve_exact, solve_wired_only
from .validate import validate_schedule


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(node_limit=args.node_limit, time_limit=args.time_limit)


def _load_instance(path: str):
    try:
        return io.load_instance(path)
    except (OSError, io.FormatError) as exc:
        print(f"error: cannot read instance {path}: {exc}", file=sys.stderr)
        return None


def cmd_validate(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    if instance is None:
        return 1
    problems = validate_job(instance.job)
    for p in problems:
        print(f"job: {p}")
    if args.schedule:
        try:
            schedule = io.load_schedule(args.schedule)
            violations = validate_schedule(instance, schedule)
        except (OSError, io.FormatError, ValueError) as exc:
            print(f"error: cannot validate schedule: {exc}", file=sys.stderr)
            return 1
        for v in violations:
            print(f"schedule: [{v.rule}] {v.detail}")
        if violations:
            return 2
    if problems:
        return 2
    print("ok")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    if instance is None:
        return 1
    problems = validate_job(instance.job)
    if problems:
        print(f"error: invalid job: {problems[0]}", file=sys.stderr)
        return 1

    cfg = _solver_config(args)
    status = OPTIMAL
    if args.scheduler == "exact":
        result = solve_exact(instance, cfg)
        schedule, mk, status = result.schedule, result.makespan, result.status
    elif args.scheduler == "wired-only":
        result = solve_wired_only(instance, cfg)
        schedule, mk, status = result.schedule, result.makespan, result.status
    else:
        if args.scheduler == "list":
            schedule = baselines.list_schedule(instance)
        elif args.scheduler == "random":
            schedule = baselines.random_schedule(instance, args.seed)
        else:
            schedule = baselines.single_rack_schedule(instance)
        mk, status = makespan(schedule, instance.job), FEASIBLE

    if status == INFEASIBLE:
        print("infeasible", file=sys.stderr)
        return 2
    if schedule is None:
        print("unknown: limits hit before any schedule was found", file=sys.stderr)
        return 3

    violations = validate_schedule(instance, schedule)
    if violations:  # internal invariant: emitted schedules are always feasible
        print(f"error: produced an invalid schedule: {violations[0].detail}", file=sys.stderr)
        return 1
    document = {"status": status, "makespan": mk}
    document.update(io.schedule_to_dict(schedule))
    text = json.dumps(document, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if status in (OPTIMAL, FEASIBLE) else 3


def cmd_export_lp(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    if instance is None:
        return 1
    bounds = bound_pair(instance.job)
    cfg = EncoderConfig()
    try:
        if args.level is None:
            model = build_rp(instance, bounds, cfg)
        else:
            model = build_fp(instance, bounds, args.level, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = write_lp(model)
    stats = model_stats(model)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(
        f"binary={stats.n_binary} continuous={stats.n_continuous} "
        f"constraints={stats.n_constraints}",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = GenConfig(
        seed=args.seed,
        network_factor=args.rho,
        racks=args.racks,
        subchannels=args.subchannels,
    )
    if args.family == "simple":
        instance = gen_simple_mapreduce(args.maps if args.maps else max(1, args.tasks - 1), cfg)
    elif args.family == "onestage":
        maps = args.maps if args.maps else max(1, -(-args.tasks // 2))
        reduces = args.reduces if args.reduces else max(1, args.tasks - maps)
        instance = gen_onestage_mapreduce(maps, reduces, cfg)
    else:
        instance = gen_random_dag(args.tasks, args.edge_prob, cfg)
    text = io.dumps_instance(instance)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    try:
        data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        spec = ExperimentSpec.from_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: cannot read experiment spec: {exc}", file=sys.stderr)
        return 1
    rows, summary = run_experiment(spec)
    write_rows_csv(rows, args.out)
    print(format_summary(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridsched",
        description="DAG job scheduling with wired/wireless transfer assignment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance and optionally a schedule")
    p.add_argument("instance")
    p.add_argument("--schedule", help="schedule JSON to check against the instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="schedule one instance")
    p.add_argument("instance")
    p.add_argument(
        "--scheduler",
        choices=["exact", "wired-only", "list", "random", "single-rack"],
        default="exact",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for the random scheduler")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--out", help="write the schedule here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export-lp", help="emit the linearized model in LP format")
    p.add_argument("instance")
    p.add_argument("--level", type=int, default=None, help="feasibility cap; omit for the minimization model")
    p.add_argument("--out", help="write the LP here instead of stdout")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("gen", help="generate a workload instance")
    p.add_argument("--family", choices=["simple", "onestage", "random"], required=True)
    p.add_argument("--tasks", type=int, default=6, help="total task count")
    p.add_argument("--maps", type=int, default=None)
    p.add_argument("--reduces", type=int, default=None)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--rho", type=float, default=0.5, help="network factor")
    p.add_argument("--racks", type=int, default=4)
    p.add_argument("--subchannels", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a sweep described by a spec file")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
