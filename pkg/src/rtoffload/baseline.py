"""Reference scheduler: global EDF over all workers, no deadline adjustment.

Tasks are only rejected when the time left to the client's deadline is less
than their WCET.  Preemption may migrate a task to another worker; a
preempted task is held back from re-dispatch until its worker has reported
the suspension, so one task never executes on two workers at once.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import replace
from typing import Optional

from .core import SimTime, Task
from .netsim import SimulationError
from .scheduler import Accept, Decision, Dispatch, Reject, RejectReason


def _key(task: Task) -> tuple[int, int]:
    return (task.absolute_deadline, task.id)


class GlobalEDFScheduler:
    name = "reference"

    def __init__(self, num_workers: int, dispatch: Optional[Dispatch] = None):
        if num_workers < 1:
            raise ValueError(f"num_workers must be >= 1, got {num_workers}")
        self.num_workers = num_workers
        self.pending: list[Task] = []
        self.running: dict[int, Task] = {}
        # preempted tasks whose worker has not yet confirmed the suspension
        self.suspending: dict[int, Task] = {}
        self._dispatch = dispatch or (lambda worker, task: None)
        self.dispatches: Counter = Counter()
        self.preemptions: Counter = Counter()

    def on_submission(self, task: Task, now: SimTime) -> Decision:
        if task.absolute_deadline - now < task.wcet:
            return Reject(RejectReason.PAST_ADJUSTED_DEADLINE)
        self._push(task)
        self._rebalance()
        return Accept(None)

    def _push(self, task: Task) -> None:
        keys = [_key(t) for t in self.pending]
        self.pending.insert(bisect.bisect_left(keys, _key(task)), task)

    def _rebalance(self) -> None:
        while self.pending:
            head = self.pending[0]
            idle = [w for w in range(self.num_workers) if w not in self.running]
            if idle:
                self._start(idle[0], self.pending.pop(0))
                continue
            victim = max(self.running, key=lambda w: (_key(self.running[w]), w))
            if _key(head) >= _key(self.running[victim]):
                return
            preempted = self.running.pop(victim)
            self.preemptions[preempted.id] += 1
            self.suspending[preempted.id] = preempted
            self._start(victim, self.pending.pop(0))

    def _start(self, worker: int, task: Task) -> None:
        self.running[worker] = task
        self.dispatches[task.id] += 1
        self._dispatch(worker, task)

    def on_preempted(self, worker: int, task_id: int, elapsed: int, now: SimTime) -> None:
        task = self.suspending.pop(task_id, None)
        if task is None:
            raise SimulationError(f"unexpected preemption report for task {task_id}")
        self._push(replace(task, elapsed_execution=elapsed))
        self._rebalance()

    def on_completion(self, worker: int, task_id: int, now: SimTime) -> None:
        running = self.running.get(worker)
        if running is not None and running.id == task_id:
            del self.running[worker]
        elif task_id in self.suspending:
            # finished before the preemption reached the worker
            del self.suspending[task_id]
        else:
            raise SimulationError(f"completion for task {task_id} unknown on worker {worker}")
        self._rebalance()

    def outstanding(self) -> dict[int, int]:
        where = {t.id: -1 for t in self.pending}
        where.update({t.id: -1 for t in self.suspending.values()})
        where.update({t.id: w for w, t in self.running.items()})
        return where

    def check_invariants(self) -> None:
        ids = [t.id for t in self.pending] + list(self.suspending) + [t.id for t in self.running.values()]
        if len(ids) != len(set(ids)):
            raise SimulationError("a task is held in more than one place")
        keys = [_key(t) for t in self.pending]
        if keys != sorted(keys):
            raise SimulationError("global queue out of EDF order")
        if self.pending and len(self.running) < self.num_workers:
            raise SimulationError("idle worker while tasks are pending")
