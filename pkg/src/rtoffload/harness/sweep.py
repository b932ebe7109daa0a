"""Scenario presets, parameter sweeps and the results CSV."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .config import ScenarioConfig
from .world import TRACE_FIELDS, RunResult, run_scenario

CSV_HEADER = (
    "run_id", "scenario", "scheduler", "heuristic", "u_factor", "clients", "workers",
    "laxity_mean_ms", "latency_mean_ms", "latency_std_ms", "seed", "submitted", "accepted",
    "rejected", "completed_on_time", "missed", "in_flight_at_end", "success_rate", "miss_rate",
    "mean_response_ms", "mean_fallback_lead_ms",
)

DEFAULT_U = (0.5, 0.75, 1.0, 1.25)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)

# axis name -> (config field, multiplier from the axis unit to the field unit)
AXES = {
    "clients": ("num_clients", 1),
    "laxity": ("laxity_mean_us", 1_000),
    "latency_std": ("wireless_stddev_us", 1_000),
    "u": ("uncertainty_factor", 1),
}

SCENARIOS = {
    "1": ("clients", (10, 20, 30, 40, 50), {"num_clients": 50}),
    "2": ("laxity", (180, 150, 120, 90, 60), {"num_clients": 30}),
    "3": ("latency_std", (10, 20, 30, 40, 50), {"num_clients": 30}),
}


def scenario_base(scenario: str, **overrides) -> ScenarioConfig:
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}, expected one of {sorted(SCENARIOS)}")
    _, _, fixed = SCENARIOS[scenario]
    return ScenarioConfig(scenario=scenario, **{**fixed, **overrides})


def _num(value: float) -> str:
    return f"{value:g}"


def _apply(base: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    name, scale = AXES[axis]
    if name == "uncertainty_factor":
        return base.replace(uncertainty_factor=float(value))
    return base.replace(**{name: int(round(value * scale))})


def plan_runs(base: ScenarioConfig, axis: str, values: Iterable, seeds: Iterable[int],
              u_values: Optional[Sequence[float]] = None,
              include_reference: bool = True) -> list[ScenarioConfig]:
    """Every configuration of a sweep, sorted by (axis value, seed, scheduler, U)."""
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}, expected one of {sorted(AXES)}")
    if u_values is None:
        u_values = (base.uncertainty_factor,) if axis == "u" else DEFAULT_U
    configs = []
    for value in sorted(values):
        point = _apply(base, axis, value)
        for seed in sorted(seeds):
            seeded = point.replace(seed=seed)
            us = (seeded.uncertainty_factor,) if axis == "u" else sorted(u_values)
            configs.extend(seeded.replace(scheduler="latency_aware", uncertainty_factor=u) for u in us)
            if include_reference and (axis != "u" or value == min(values)):
                configs.append(seeded.replace(scheduler="reference"))
    return configs


def _run(config: ScenarioConfig) -> RunResult:
    return run_scenario(config)


def run_all(configs: Sequence[ScenarioConfig], jobs: int = 1) -> list[RunResult]:
    """Run configurations, in parallel when ``jobs > 1``; output order equals input order."""
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run, configs, chunksize=4))
    return [_run(c) for c in configs]


def sweep(base: ScenarioConfig, axis: str, values: Iterable, seeds: Iterable[int],
          u_values: Optional[Sequence[float]] = None, include_reference: bool = True,
          jobs: int = 1) -> list[dict]:
    values = list(values)
    configs = plan_runs(base, axis, values, seeds, u_values, include_reference)
    return [csv_row(r) for r in run_all(configs, jobs)]


def run_id(config: ScenarioConfig) -> str:
    parts = [f"s{config.scenario}", f"c{config.num_clients}", f"w{config.num_workers}",
             f"lax{_num(config.laxity_mean_us / 1000)}", f"sd{_num(config.wireless_stddev_us / 1000)}",
             f"seed{config.seed}", config.scheduler]
    if config.scheduler == "latency_aware":
        parts.append(f"u{_num(config.uncertainty_factor)}")
    return "-".join(parts)


def csv_row(result: RunResult) -> dict:
    c, m = result.config, result.metrics
    latency_aware = c.scheduler == "latency_aware"
    return {
        "run_id": run_id(c),
        "scenario": c.scenario,
        "scheduler": c.scheduler,
        "heuristic": c.heuristic if latency_aware else "none",
        "u_factor": _num(c.uncertainty_factor) if latency_aware else "",
        "clients": c.num_clients,
        "workers": c.num_workers,
        "laxity_mean_ms": _num(c.laxity_mean_us / 1000),
        "latency_mean_ms": _num(c.wireless_mean_us / 1000),
        "latency_std_ms": _num(c.wireless_stddev_us / 1000),
        "seed": c.seed,
        "submitted": m.submitted,
        "accepted": m.accepted,
        "rejected": m.rejected,
        "completed_on_time": m.completed_on_time,
        "missed": m.missed,
        "in_flight_at_end": m.in_flight_at_end,
        "success_rate": f"{m.success_rate:.6f}",
        "miss_rate": f"{m.miss_rate:.6f}",
        "mean_response_ms": f"{m.mean_response_us / 1000:.3f}",
        "mean_fallback_lead_ms": f"{m.mean_fallback_lead_us / 1000:.3f}",
    }


def format_csv(rows: Iterable[dict], fields: Sequence[str] = CSV_HEADER) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(rows: Iterable[dict], path, fields: Sequence[str] = CSV_HEADER) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(rows, fields))
    return path


def write_trace(result: RunResult, path) -> Path:
    return write_csv(result.trace, path, TRACE_FIELDS)
