"""Command-line entry point: ``run``, ``sweep`` and ``plot``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..netsim import SimulationError
from .config import ConfigError, load_config
from .plots import PlotError, emit_plots
from .sweep import (DEFAULT_SEEDS, DEFAULT_U, SCENARIOS, csv_row, scenario_base, sweep,
                    write_csv, write_trace)
from .world import run_scenario


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtoffload",
                                     description="Real-time task offloading simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a key=value config file")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path, default=Path("."))
    run.add_argument("--trace", action="store_true", help="also write a per-task trace CSV")

    sw = sub.add_parser("sweep", help="sweep one of the evaluation scenarios")
    sw.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    sw.add_argument("--u", type=_floats, default=list(DEFAULT_U))
    sw.add_argument("--seeds", type=_ints, default=list(DEFAULT_SEEDS))
    sw.add_argument("--values", type=_floats, help="override the swept axis values")
    sw.add_argument("--duration", type=float, help="simulated seconds per run")
    sw.add_argument("--workers", type=int, help="number of workers")
    sw.add_argument("--jobs", type=int, default=1, help="parallel processes")
    sw.add_argument("--out", type=Path, default=Path("."))

    plot = sub.add_parser("plot", help="render charts from a results CSV")
    plot.add_argument("--csv", required=True, type=Path)
    plot.add_argument("--out", required=True, type=Path)
    return parser


def _cmd_run(args) -> None:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    result = run_scenario(config, trace=args.trace)
    path = write_csv([csv_row(result)], args.out / "results.csv")
    m = result.metrics
    print(f"submitted={m.submitted} accepted={m.accepted} rejected={m.rejected} "
          f"on_time={m.completed_on_time} missed={m.missed} "
          f"success_rate={m.success_rate:.3f} miss_rate={m.miss_rate:.3f}")
    print(f"wrote {path}")
    if args.trace:
        print(f"wrote {write_trace(result, args.out / 'trace.csv')}")


def _cmd_sweep(args) -> None:
    overrides = {}
    if args.duration is not None:
        overrides["duration_s"] = args.duration
    if args.workers is not None:
        overrides["num_workers"] = args.workers
    base = scenario_base(args.scenario, **overrides)
    axis, values, _ = SCENARIOS[args.scenario]
    if args.values:
        values = args.values
    rows = sweep(base, axis, values, args.seeds, u_values=args.u, jobs=args.jobs)
    path = write_csv(rows, args.out / f"scenario{args.scenario}.csv")
    print(f"wrote {len(rows)} rows to {path}")


def _cmd_plot(args) -> None:
    for path in emit_plots(args.csv, args.out):
        print(f"wrote {path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "plot": _cmd_plot}[args.command]
    try:
        handler(args)
    except (ConfigError, PlotError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
