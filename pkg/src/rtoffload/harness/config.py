"""Scenario configuration and its flat ``key=value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..client import ClientConfig
from ..netsim import LinkModel
from ..scheduler import Heuristic, SchedulerConfig

SCHEDULERS = ("latency_aware", "reference")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything that determines one run, together with the code version.

    Durations are integer microseconds, ``duration_s`` is simulated seconds.
    ``laxity_stddev_us`` left unset means a fifth of ``laxity_mean_us``.
    ``duration_s`` bounds the submission window; in-flight work is drained
    afterwards.
    """

    scenario: str = "custom"
    scheduler: str = "latency_aware"
    num_clients: int = 30
    num_workers: int = 4
    uncertainty_factor: float = 1.0
    heuristic: str = "worst_fit"
    arrival_rate: float = 1.0
    laxity_mean_us: int = 100_000
    laxity_stddev_us: Optional[int] = None
    actual_exec_us: int = 90_000
    wcet_us: int = 100_000
    payload_bytes: int = 0
    result_payload_bytes: int = 0
    wireless_mean_us: int = 30_000
    wireless_stddev_us: int = 10_000
    wireless_min_latency_us: int = 1_000
    wireless_bandwidth: Optional[float] = None
    wired_mean_us: int = 200
    wired_stddev_us: int = 0
    wired_min_latency_us: int = 0
    context_switch_us: int = 0
    dispatch_overhead_us: int = 0
    duration_s: float = 60.0
    seed: int = 0

    def __post_init__(self):
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"scheduler must be one of {SCHEDULERS}, got {self.scheduler!r}")
        if self.heuristic not in {h.value for h in Heuristic}:
            raise ConfigError(f"unknown heuristic {self.heuristic!r}")
        if self.num_clients < 1 or self.num_workers < 1:
            raise ConfigError("num_clients and num_workers must be >= 1")
        if not self.duration_s > 0:
            raise ConfigError(f"duration_s must be positive, got {self.duration_s}")
        try:
            self.client_config()
            self.scheduler_config()
            self.wireless_link()
            self.wired_link()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.context_switch_us < 0:
            raise ConfigError("context_switch_us must be >= 0")

    def client_config(self) -> ClientConfig:
        return ClientConfig(
            arrival_rate=self.arrival_rate,
            laxity_mean=self.laxity_mean_us,
            laxity_stddev=self.laxity_stddev_us,
            actual_exec=self.actual_exec_us,
            wcet=self.wcet_us,
            payload_bytes=self.payload_bytes,
            result_payload_bytes=self.result_payload_bytes,
        )

    def scheduler_config(self) -> SchedulerConfig:
        return SchedulerConfig(
            uncertainty_factor=self.uncertainty_factor,
            heuristic=Heuristic(self.heuristic),
            num_workers=self.num_workers,
            dispatch_overhead=self.dispatch_overhead_us,
        )

    def wireless_link(self) -> LinkModel:
        return LinkModel(self.wireless_mean_us, self.wireless_stddev_us,
                         self.wireless_min_latency_us, self.wireless_bandwidth)

    def wired_link(self) -> LinkModel:
        return LinkModel(self.wired_mean_us, self.wired_stddev_us, self.wired_min_latency_us)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _convert(name: str, raw: str):
    kind = _FIELDS[name].type
    optional = kind.startswith("Optional[")
    if optional:
        if raw.lower() in ("", "none"):
            return None
        kind = kind[len("Optional["):-1]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind}, got {raw!r}") from None
    return raw


def parse_config(text: str) -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw)
    return ScenarioConfig(**values)


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def dump_config(config: ScenarioConfig) -> str:
    lines = []
    for name in _FIELDS:
        value = getattr(config, name)
        lines.append(f"{name}={'none' if value is None else value}")
    return "\n".join(lines) + "\n"
