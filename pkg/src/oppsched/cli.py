"""Command-line front end.

Usage errors exit with status 2, domain errors with status 1; either way a
single ``error: <Code>: <message>`` line goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import analytics, simulator, solver
from .errors import OppschedError
from .fixtures import FIXTURES, fixture_path
from .model import Instance, Schedule, infer_format, parse_instance_file, serialize_instance

SEED_ENV = "OPPSCHED_SEED"
THREADS_ENV = "OPPSCHED_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _precision(text: str):
    if text == "full":
        return repr
    try:
        digits = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a digit count or 'full'") from None
    if digits < 1:
        raise argparse.ArgumentTypeError("digit count must be >= 1")
    return lambda x: f"{x:.{digits}g}"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oppsched", description="Optimal ordering of sequential stochastic opportunities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("input", help=f"instance file (.csv/.json) or fixture:NAME ({', '.join(FIXTURES)})")
    common.add_argument("--format", choices=("csv", "json"), help="input format (default: from file suffix)")
    common.add_argument("-o", "--output", help="write results here instead of stdout")
    common.add_argument(
        "--precision", type=_precision, default=_precision("6"),
        help="significant digits for floats, or 'full' (default 6)",
    )
    common.add_argument("--threads", type=int, help=f"worker threads (env {THREADS_ENV}, default 1)")

    p = sub.add_parser("validate", parents=[common], help="print the normalized instance")
    p.add_argument("--emit", choices=("csv", "json"), help="output format (default: input format)")

    p = sub.add_parser("evaluate", parents=[common], help="expected reward, finish time and objective of a schedule")
    p.add_argument("--schedule", required=True, help="1-based order, e.g. 4-1-5-2-3")
    p.add_argument("--eta", type=float, default=0.0)

    p = sub.add_parser("solve", parents=[common], help="optimal schedule for a tradeoff weight")
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--method", choices=("sort", "brute"), default="sort")
    p.add_argument("--max-n", type=int, default=solver.DEFAULT_MAX_N, help="size cap for --method brute")

    p = sub.add_parser("frontier", parents=[common], help="tradeoff-optimal schedules over an eta grid (CSV)")
    p.add_argument("--eta-min", type=float, default=0.0)
    p.add_argument("--eta-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=101)

    p = sub.add_parser("enumerate", parents=[common], help="(R, T) of every schedule with Pareto flags (CSV)")
    p.add_argument("--max-n", type=int, default=solver.DEFAULT_MAX_N)

    for name, helptext in (
        ("simulate", "Monte Carlo summary of a schedule (JSON)"),
        ("curves", "reward/finish-time curves over a time grid (CSV)"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--schedule", help="1-based order (default: the optimal schedule at --eta)")
        p.add_argument("--eta", type=float, default=0.0)
        p.add_argument("--replications", type=int, default=100_000)
        p.add_argument("--seed", type=int, help=f"random seed (env {SEED_ENV}, default 0)")
    p.add_argument("--times", help="comma-separated time points")
    p.add_argument("--t-max", type=float, help="uniform grid end (with --points)")
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--empirical", action="store_true", help="estimate by simulation (any response-time law)")
    return parser


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _source_path(spec: str) -> Path:
    if spec.startswith("fixture:"):
        name = spec.split(":", 1)[1]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}")
        return fixture_path(name)
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"cannot read input file {spec!r}")
    return path


def _load(args) -> Instance:
    return parse_instance_file(_source_path(args.input), args.format)


def _schedule(args, inst: Instance) -> Schedule:
    if args.schedule:
        sched = Schedule.parse(args.schedule)
        sched.check(inst)
        return sched
    return solver.solve(inst, args.eta).schedule


def _report(ev: analytics.EvaluatedSchedule, fmt) -> str:
    return (
        f"schedule: {ev.schedule}\n"
        f"eta: {fmt(ev.eta)}\n"
        f"expected_reward: {fmt(ev.expected_reward)}\n"
        f"expected_finish_time: {fmt(ev.expected_finish_time)}\n"
        f"objective: {fmt(ev.objective)}\n"
    )


def _time_grid(args, inst: Instance, sched: Schedule) -> list[float]:
    if args.times:
        try:
            return [float(tok) for tok in args.times.split(",")]
        except ValueError:
            raise UsageError(f"cannot parse --times {args.times!r}") from None
    t_max = args.t_max
    if t_max is None:
        t_max = sum(inst.mean_times)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    return [t_max * k / (args.points - 1) for k in range(args.points)]


def run(args) -> str:
    """Execute a parsed command and return its output text."""
    inst = _load(args)
    fmt = args.precision
    threads = args.threads if args.threads is not None else _env_int(THREADS_ENV, 1)
    cmd = args.command

    if cmd == "validate":
        emit = args.emit or args.format or infer_format(_source_path(args.input))
        return serialize_instance(inst, emit)

    if cmd == "evaluate":
        sched = Schedule.parse(args.schedule)
        return _report(analytics.evaluate(inst, sched, args.eta), fmt)

    if cmd == "solve":
        if args.method == "brute":
            ev = solver.brute_force(inst, args.eta, max_n=args.max_n, workers=threads)
        else:
            ev = solver.solve(inst, args.eta)
        return _report(ev, fmt)

    if cmd == "frontier":
        return solver.frontier_to_csv(solver.frontier_sweep(inst, args.eta_min, args.eta_max, args.steps), fmt)

    if cmd == "enumerate":
        cloud = solver.enumerate_cloud(inst, max_n=args.max_n)
        flags = solver.pareto_mask([(pt.expected_finish_time, pt.expected_reward) for pt in cloud])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("schedule", "expected_reward", "expected_finish_time", "pareto"))
        for pt, flag in zip(cloud, flags):
            writer.writerow((str(pt.schedule), fmt(pt.expected_reward), fmt(pt.expected_finish_time), int(flag)))
        return buf.getvalue()

    seed = args.seed if args.seed is not None else _env_int(SEED_ENV, 0)
    sched = _schedule(args, inst)

    if cmd == "simulate":
        summary = simulator.simulate(inst, sched, args.replications, seed, threads)
        out = {"schedule": str(sched), "seed": seed, **summary.to_dict()}
        return json.dumps(out, indent=2) + "\n"

    if cmd == "curves":
        ts = _time_grid(args, inst, sched)
        if args.empirical:
            points = simulator.empirical_curves(inst, sched, ts, args.replications, seed, threads)
        else:
            points = analytics.time_curves(inst, sched, ts)
        return analytics.curves_to_csv(points, fmt)

    raise UsageError(f"unknown command {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = run(args)
    except UsageError as exc:
        print(f"error: UsageError: {exc}", file=sys.stderr)
        return 2
    except OppschedError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
