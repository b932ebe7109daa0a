"""Simulated client: sporadic single-in-flight submissions and outcome bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import MS, SECOND, SimTime, Task, TaskOutcome, Verdict
from .netsim import LinkModel, SimulationError, connection_setup_time


@dataclass(frozen=True)
class ClientConfig:
    """Workload of one client; durations in microseconds, rate in tasks per second."""

    arrival_rate: float = 1.0
    laxity_mean: int = 100 * MS
    laxity_stddev: Optional[int] = None
    actual_exec: int = 90 * MS
    wcet: int = 100 * MS
    payload_bytes: int = 0
    result_payload_bytes: int = 0

    def __post_init__(self):
        if not self.arrival_rate > 0:
            raise ValueError(f"arrival_rate must be positive, got {self.arrival_rate}")
        if self.laxity_mean <= 0:
            raise ValueError(f"laxity_mean must be positive, got {self.laxity_mean}")
        if not self.wcet >= self.actual_exec > 0:
            raise ValueError(f"need wcet >= actual_exec > 0, got {self.wcet}, {self.actual_exec}")
        if self.laxity_stddev is not None and self.laxity_stddev < 0:
            raise ValueError("laxity_stddev must be >= 0")
        if self.payload_bytes < 0 or self.result_payload_bytes < 0:
            raise ValueError("payload sizes must be >= 0")

    @property
    def effective_laxity_stddev(self) -> int:
        """Defaults to a fifth of the mean when unset."""
        if self.laxity_stddev is None:
            return self.laxity_mean // 5
        return self.laxity_stddev


def exponential_gap(rate: float, rng: np.random.Generator) -> int:
    return int(round(rng.exponential(SECOND / rate)))


def next_submission_time(prev_submission: SimTime, prev_outcome_time: SimTime, gap: int) -> SimTime:
    """A client submits again after its sampled gap, but never before its last task resolved."""
    return max(prev_submission + gap, prev_outcome_time)


def make_task(task_id: int, client_id: int, now: SimTime, config: ClientConfig,
              uplink: LinkModel, rng: np.random.Generator) -> Task:
    stddev = config.effective_laxity_stddev
    lax = rng.normal(config.laxity_mean, stddev) if stddev else config.laxity_mean
    lax = max(0, int(round(lax)))
    relative = config.wcet + lax
    return Task(
        id=task_id,
        client=client_id,
        absolute_deadline=now + relative,
        initial_relative_deadline=relative,
        connection_setup_time=connection_setup_time(uplink, rng),
        wcet=config.wcet,
        payload_bytes=config.payload_bytes,
        result_payload_bytes=config.result_payload_bytes,
    )


class Client:
    """Outcome counters and the in-flight slot of one client."""

    def __init__(self, client_id: int, config: ClientConfig):
        self.id = client_id
        self.config = config
        self.in_flight: Optional[Task] = None
        self.submit_time: SimTime = 0
        self.submitted = 0
        self.rejected = 0
        self.on_time = 0
        self.missed = 0
        self.fallback_leads: list[int] = []
        self.response_times: list[int] = []
        self.outcomes: list[TaskOutcome] = []

    def submit(self, task: Task, now: SimTime) -> None:
        if self.in_flight is not None:
            raise SimulationError(f"client {self.id} already has task {self.in_flight.id} in flight")
        self.in_flight = task
        self.submit_time = now
        self.submitted += 1

    def on_outcome(self, outcome: TaskOutcome, now: SimTime) -> None:
        task = self.in_flight
        if task is None or task.id != outcome.task_id:
            raise SimulationError(f"client {self.id} got an outcome for unknown task {outcome.task_id}")
        if outcome.verdict is Verdict.REJECTED:
            self.rejected += 1
            laxity = task.initial_relative_deadline - task.wcet
            self.fallback_leads.append(laxity - (now - outcome.submit_time))
        else:
            if outcome.verdict is Verdict.COMPLETED_ON_TIME:
                self.on_time += 1
            else:
                self.missed += 1
            self.response_times.append(now - outcome.submit_time)
        self.outcomes.append(outcome)
        self.in_flight = None

    def check_invariants(self) -> None:
        resolved = self.rejected + self.on_time + self.missed
        if self.submitted != resolved + (self.in_flight is not None):
            raise SimulationError(f"client {self.id} counters do not add up")
