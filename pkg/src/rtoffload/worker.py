"""Simulated worker: one execution at a time, preemptable, result delivery in parallel.

The worker does not pick its own next task.  When the running execution
finishes, suspended ones stay suspended until the scheduler dispatches them
again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .core import SimTime, Task
from .netsim import EventQueue, SimulationError


@dataclass
class Execution:
    task: Task
    actual: int
    executed: int = 0
    resumed_at: SimTime = 0
    token: int = 0

    @property
    def remaining(self) -> int:
        return self.actual - self.executed


class WorkerAgent:
    """A worker on the simulation event loop.

    Args:
        worker_id: index of this worker.
        events: the run's event queue.
        exec_time: actual execution time of a task (may be below its WCET).
        connect: samples the connection setup time to a task's client.
        report_preempted: ``(worker, task_id, elapsed)`` sent to the scheduler.
        report_completion: ``(worker, task_id, elapsed)`` sent to the scheduler.
        send_result: ``(worker, task)`` puts the result on the wire to the client.
        context_switch: time charged whenever an execution is started by a
            preemption or resumed after one.
    """

    def __init__(self, worker_id: int, events: EventQueue,
                 exec_time: Callable[[Task], int],
                 connect: Callable[[Task], int],
                 report_preempted: Callable[[int, int, int], None],
                 report_completion: Callable[[int, int, int], None],
                 send_result: Callable[[int, Task], None],
                 context_switch: int = 0):
        self.id = worker_id
        self.events = events
        self.exec_time = exec_time
        self.connect = connect
        self.report_preempted = report_preempted
        self.report_completion = report_completion
        self.send_result = send_result
        self.context_switch = context_switch
        self.current: Optional[Execution] = None
        self.suspended: list[Execution] = []
        self.conn_ready_at: dict[int, SimTime] = {}
        self.completed: set[int] = set()
        self._tokens = 0

    @property
    def idle(self) -> bool:
        return self.current is None

    def on_receive_task(self, task: Task) -> None:
        now = self.events.now
        if task.id in self.completed or (self.current is not None and self.current.task.id == task.id):
            raise SimulationError(f"worker {self.id} received task {task.id} twice")
        if task.id not in self.conn_ready_at:
            self.conn_ready_at[task.id] = now + self.connect(task)

        execution = self._take_suspended(task.id)
        switch = execution is not None
        if execution is None:
            execution = Execution(task, self.exec_time(task), executed=task.elapsed_execution)
            if execution.remaining < 0:
                raise SimulationError(f"task {task.id} elapsed exceeds its execution time")

        if self.current is not None:
            preempted = self.current
            preempted.executed += max(0, now - preempted.resumed_at)
            preempted.token = -1
            self.suspended.append(preempted)
            self.report_preempted(self.id, preempted.task.id, preempted.executed)
            switch = True

        self._tokens += 1
        execution.token = self._tokens
        execution.resumed_at = now + (self.context_switch if switch else 0)
        self.current = execution
        self.events.post_at(execution.resumed_at + execution.remaining,
                            self._on_execution_complete, execution.token)

    def _take_suspended(self, task_id: int) -> Optional[Execution]:
        for i in range(len(self.suspended) - 1, -1, -1):
            if self.suspended[i].task.id == task_id:
                return self.suspended.pop(i)
        return None

    def forget(self, task_id: int) -> None:
        """Drop a suspended execution that migrated to another worker."""
        self._take_suspended(task_id)
        self.conn_ready_at.pop(task_id, None)

    def holds(self, task_id: int) -> bool:
        return any(e.task.id == task_id for e in self.suspended)

    def _on_execution_complete(self, token: int) -> None:
        execution = self.current
        if execution is None or execution.token != token:
            return  # superseded by a preemption
        now = self.events.now
        execution.executed += now - execution.resumed_at
        if execution.executed != execution.actual:
            raise SimulationError(f"task {execution.task.id} executed {execution.executed}, "
                                  f"expected {execution.actual}")
        self.current = None
        self.on_execution_complete(execution.task, execution.executed)

    def on_execution_complete(self, task: Task, elapsed: int) -> None:
        now = self.events.now
        ready = self.conn_ready_at.pop(task.id, None)
        if ready is None:
            raise SimulationError(f"worker {self.id} has no client connection for task {task.id}")
        self.completed.add(task.id)
        self.report_completion(self.id, task.id, elapsed)
        self.events.post_at(max(now, ready), self.send_result, self.id, task)
