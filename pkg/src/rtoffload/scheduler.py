"""Latency-aware partitioned EDF scheduler.

Every submission goes through the same pipeline: tighten the client's
deadline by the (scaled) expected network delay, reject if the tightened
window cannot even hold the remaining WCET, replay each worker's queue as a
single-processor EDF schedule with the candidate added, and pick one of the
workers that stays miss-free according to the configured fit heuristic.
"""

from __future__ import annotations

import bisect
import enum
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Mapping, Optional, Union

from .core import SimTime, Task, density_against, remaining_wcet
from .netsim import SimulationError


class Heuristic(enum.Enum):
    FIRST_FIT = "first_fit"
    BEST_FIT = "best_fit"
    WORST_FIT = "worst_fit"


@dataclass(frozen=True)
class SchedulerConfig:
    """``dispatch_overhead`` is extra planned time charged per task in queue replays (µs)."""

    uncertainty_factor: float = 1.0
    heuristic: Heuristic = Heuristic.WORST_FIT
    num_workers: int = 4
    dispatch_overhead: int = 0

    def __post_init__(self):
        if not self.uncertainty_factor >= 0:
            raise ValueError(f"uncertainty_factor must be >= 0, got {self.uncertainty_factor}")
        if self.num_workers < 1:
            raise ValueError(f"num_workers must be >= 1, got {self.num_workers}")
        if self.dispatch_overhead < 0:
            raise ValueError("dispatch_overhead must be >= 0")


@dataclass(frozen=True)
class AdjustedTask:
    task: Task
    adjusted_deadline: SimTime
    expected_delay: int
    adjusted_delay: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.adjusted_deadline, self.task.id)

    @property
    def remaining(self) -> int:
        return remaining_wcet(self.task)


@dataclass
class WorkerQueueState:
    """The scheduler's view of one worker: what it runs and what waits, in EDF order."""

    worker: int
    running: Optional[AdjustedTask] = None
    pending: list[AdjustedTask] = field(default_factory=list)

    def tasks(self) -> Iterator[AdjustedTask]:
        if self.running is not None:
            yield self.running
        yield from self.pending

    def insert_pending(self, adj: AdjustedTask) -> None:
        keys = [p.key for p in self.pending]
        self.pending.insert(bisect.bisect_left(keys, adj.key), adj)

    def __len__(self):
        return len(self.pending) + (self.running is not None)


class RejectReason(enum.Enum):
    PAST_ADJUSTED_DEADLINE = "past_adjusted_deadline"
    NO_FEASIBLE_WORKER = "no_feasible_worker"


@dataclass(frozen=True)
class Accept:
    worker: Optional[int]


@dataclass(frozen=True)
class Reject:
    reason: RejectReason


Decision = Union[Accept, Reject]


def _round_half_away(x: float) -> int:
    magnitude = math.floor(abs(x) + 0.5)
    return magnitude if x >= 0 else -magnitude


def adjust_deadline(task: Task, now: SimTime, config: SchedulerConfig) -> AdjustedTask:
    # time already spent in transit from the client, assuming one shared clock
    expected = max(0, task.initial_relative_deadline - (task.absolute_deadline - now))
    if task.connection_setup_time > task.wcet:
        adjusted = expected + task.connection_setup_time - task.wcet
    else:
        adjusted = expected
    deadline = task.absolute_deadline - _round_half_away(config.uncertainty_factor * adjusted)
    return AdjustedTask(task, deadline, expected, adjusted)


def admission_precheck(adj: AdjustedTask, now: SimTime) -> bool:
    return adj.adjusted_deadline - now > adj.remaining


def feasible_with(queue: WorkerQueueState, candidate: AdjustedTask, now: SimTime,
                  overhead: int = 0) -> Optional[dict[int, SimTime]]:
    """Replay the queue plus ``candidate`` as preemptive EDF on one worker.

    All tasks are treated as released at ``now`` and executed back to back in
    adjusted-deadline order, each taking its remaining WCET plus ``overhead``.

    Returns:
        Predicted finish time per task id, or ``None`` if any task would finish
        after its adjusted deadline or the candidate fails the precheck.
    """
    if not admission_precheck(candidate, now):
        return None
    finish = now
    schedule = {}
    for adj in sorted([*queue.tasks(), candidate], key=lambda a: a.key):
        finish += adj.remaining + overhead
        if finish > adj.adjusted_deadline:
            return None
        schedule[adj.task.id] = finish
    return schedule


def queue_density(queue: WorkerQueueState, candidate: AdjustedTask, now: SimTime) -> float:
    """Sum of task densities against adjusted deadlines.

    Raises:
        DeadlinePassed: if some adjusted deadline is not after ``now``.
    """
    return sum(density_against(adj.remaining, adj.adjusted_deadline, now)
               for adj in [*queue.tasks(), candidate])


def select_worker(feasible: Mapping[int, float], heuristic: Heuristic) -> int:
    if not feasible:
        raise ValueError("select_worker needs at least one feasible worker")
    if heuristic is Heuristic.FIRST_FIT:
        return min(feasible)
    if heuristic is Heuristic.BEST_FIT:
        return min(feasible, key=lambda w: (-feasible[w], w))
    return min(feasible, key=lambda w: (feasible[w], w))


Dispatch = Callable[[int, Task], None]


class LatencyAwareScheduler:
    """Partitioned EDF with deadline adjustment and admission control.

    The scheduler only mutates its queues and calls ``dispatch(worker, task)``
    when a task must be (re)started on a worker; message delivery is the
    caller's business.
    """

    name = "latency_aware"

    def __init__(self, config: SchedulerConfig, dispatch: Optional[Dispatch] = None):
        self.config = config
        self.queues = [WorkerQueueState(w) for w in range(config.num_workers)]
        self._dispatch = dispatch or (lambda worker, task: None)
        self._location: dict[int, int] = {}
        self.dispatches: Counter = Counter()
        self.preemptions: Counter = Counter()

    def on_submission(self, task: Task, now: SimTime) -> Decision:
        adj = adjust_deadline(task, now, self.config)
        if not admission_precheck(adj, now):
            return Reject(RejectReason.PAST_ADJUSTED_DEADLINE)

        densities = {}
        for queue in self.queues:
            if feasible_with(queue, adj, now, self.config.dispatch_overhead) is None:
                continue
            densities[queue.worker] = queue_density(queue, adj, now)
            if self.config.heuristic is Heuristic.FIRST_FIT:
                break
        if not densities:
            return Reject(RejectReason.NO_FEASIBLE_WORKER)

        worker = select_worker(densities, self.config.heuristic)
        self._enqueue(self.queues[worker], adj)
        return Accept(worker)

    def _enqueue(self, queue: WorkerQueueState, adj: AdjustedTask) -> None:
        self._location[adj.task.id] = queue.worker
        running = queue.running
        if running is None:
            queue.running = adj
            self._start(queue.worker, adj)
        elif adj.key < running.key:
            self.preemptions[running.task.id] += 1
            queue.insert_pending(running)
            queue.running = adj
            self._start(queue.worker, adj)
        else:
            queue.insert_pending(adj)

    def _start(self, worker: int, adj: AdjustedTask) -> None:
        self.dispatches[adj.task.id] += 1
        self._dispatch(worker, adj.task)

    def on_preempted(self, worker: int, task_id: int, elapsed: int, now: SimTime) -> None:
        """Record the elapsed execution ``t_e`` a worker reports for a suspended task."""
        queue = self._queue_of(worker, task_id)
        for i, adj in enumerate(queue.pending):
            if adj.task.id == task_id:
                queue.pending[i] = replace(adj, task=replace(adj.task, elapsed_execution=elapsed))
                return
        # The task was re-dispatched before the report arrived.
        if queue.running is not None and queue.running.task.id == task_id:
            queue.running = replace(queue.running,
                                    task=replace(queue.running.task, elapsed_execution=elapsed))
            return
        raise SimulationError(f"preemption report for task {task_id} not queued on worker {worker}")

    def on_completion(self, worker: int, task_id: int, now: SimTime) -> None:
        queue = self._queue_of(worker, task_id)
        del self._location[task_id]
        if queue.running is not None and queue.running.task.id == task_id:
            queue.running = None
            if queue.pending:
                queue.running = queue.pending.pop(0)
                self._start(worker, queue.running)
            return
        # A preemption was sent but the task finished before it reached the worker.
        for i, adj in enumerate(queue.pending):
            if adj.task.id == task_id:
                del queue.pending[i]
                return
        raise SimulationError(f"completion for task {task_id} unknown on worker {worker}")

    def _queue_of(self, worker: int, task_id: int) -> WorkerQueueState:
        if not 0 <= worker < len(self.queues):
            raise SimulationError(f"unknown worker {worker}")
        if self._location.get(task_id) != worker:
            raise SimulationError(f"task {task_id} is not assigned to worker {worker}")
        return self.queues[worker]

    def outstanding(self) -> dict[int, int]:
        """Accepted, not yet completed tasks mapped to their worker."""
        return dict(self._location)

    def check_invariants(self) -> None:
        seen: dict[int, int] = {}
        for queue in self.queues:
            if queue.running is None and queue.pending:
                raise SimulationError(f"worker {queue.worker} idle with pending tasks")
            keys = [p.key for p in queue.pending]
            if keys != sorted(keys):
                raise SimulationError(f"worker {queue.worker} pending queue out of EDF order")
            for adj in queue.tasks():
                if adj.task.id in seen:
                    raise SimulationError(f"task {adj.task.id} queued on two workers")
                seen[adj.task.id] = queue.worker
        if seen != self._location:
            raise SimulationError("queue contents disagree with task locations")
