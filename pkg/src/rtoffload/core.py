"""Task model and the timing arithmetic shared by every other module.

All times are integer microseconds since simulation start.  Durations are
integer microseconds too; only :func:`density` returns a float.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

SimTime = int
"""Microseconds since simulation start."""

MS = 1_000
SECOND = 1_000_000


class DeadlinePassed(ValueError):
    """Raised when a ratio against time-to-deadline is requested for an expired task."""


@dataclass(frozen=True)
class Task:
    """A unit of offloaded work as it travels between client, scheduler and worker.

    ``absolute_deadline`` is the client's deadline and is never modified; the
    scheduler keeps its tightened copy alongside (see ``AdjustedTask``).
    ``params`` is never inspected, only ``payload_bytes`` affects timing.
    """

    id: int
    client: int
    absolute_deadline: SimTime
    initial_relative_deadline: int
    connection_setup_time: int
    wcet: int
    elapsed_execution: int = 0
    params: bytes = b""
    payload_bytes: int = 0
    result_payload_bytes: int = 0

    def __post_init__(self):
        if self.wcet <= 0:
            raise ValueError(f"task {self.id}: wcet must be positive, got {self.wcet}")
        if self.initial_relative_deadline <= 0:
            raise ValueError(
                f"task {self.id}: initial_relative_deadline must be positive, "
                f"got {self.initial_relative_deadline}"
            )
        if not 0 <= self.elapsed_execution <= self.wcet:
            raise ValueError(
                f"task {self.id}: elapsed_execution {self.elapsed_execution} "
                f"outside [0, {self.wcet}]"
            )
        if self.connection_setup_time < 0 or self.payload_bytes < 0 or self.result_payload_bytes < 0:
            raise ValueError(f"task {self.id}: negative duration or size")


class Verdict(enum.Enum):
    REJECTED = "rejected"
    COMPLETED_ON_TIME = "on_time"
    MISSED_DEADLINE = "missed"


@dataclass(frozen=True)
class TaskOutcome:
    task_id: int
    verdict: Verdict
    submit_time: SimTime
    decision_time: Optional[SimTime]
    completion_time: Optional[SimTime] = None

    @classmethod
    def for_result(cls, task: Task, submit_time: SimTime, decision_time: Optional[SimTime],
                   arrival: SimTime) -> "TaskOutcome":
        """Classify a result that reached the client at ``arrival``.

        The deadline is inclusive: a result arriving exactly at the deadline is on time.
        """
        verdict = (Verdict.COMPLETED_ON_TIME if arrival <= task.absolute_deadline
                   else Verdict.MISSED_DEADLINE)
        return cls(task.id, verdict, submit_time, decision_time, arrival)


def remaining_wcet(task: Task) -> int:
    return max(0, task.wcet - task.elapsed_execution)


def laxity(task: Task, now: SimTime) -> int:
    """Slack left before the task must start to finish by its deadline; may be negative."""
    return task.absolute_deadline - now - remaining_wcet(task)


def density(task: Task, now: SimTime) -> float:
    """Remaining WCET per unit of time left until the deadline.

    Raises:
        DeadlinePassed: if ``absolute_deadline <= now``.
    """
    return density_against(remaining_wcet(task), task.absolute_deadline, now)


def density_against(remaining: int, deadline: SimTime, now: SimTime) -> float:
    window = deadline - now
    if window <= 0:
        raise DeadlinePassed(f"deadline {deadline} is not after now={now}")
    return remaining / window
