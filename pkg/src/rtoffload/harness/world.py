"""One simulated deployment: clients, a scheduler, workers and the links between them."""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import fmean
from typing import Optional

from ..baseline import GlobalEDFScheduler
from ..client import Client, exponential_gap, make_task, next_submission_time
from ..core import SECOND, SimTime, Task, TaskOutcome, Verdict
from ..netsim import (EventQueue, FifoChannel, SimulationError, connection_setup_time,
                      sample_one_way, spawn_rngs, transfer_time)
from ..scheduler import Accept, LatencyAwareScheduler
from ..worker import WorkerAgent
from .config import ScenarioConfig

TRACE_FIELDS = ("task_id", "client", "submit", "decision", "worker", "dispatches",
                "preemptions", "completion", "deadline", "verdict")

# Upper bound on the drain phase after submissions stop; hitting it leaves tasks in flight.
DRAIN_LIMIT_S = 600


@dataclass
class RunMetrics:
    submitted: int = 0
    accepted: int = 0
    rejected: int = 0
    completed_on_time: int = 0
    missed: int = 0
    in_flight_at_end: int = 0
    mean_response_us: float = 0.0
    mean_fallback_lead_us: float = 0.0

    @property
    def success_rate(self) -> float:
        return self.completed_on_time / self.submitted if self.submitted else 0.0

    @property
    def miss_rate(self) -> float:
        """Missed deadlines among accepted tasks."""
        return self.missed / self.accepted if self.accepted else 0.0

    @property
    def miss_fraction(self) -> float:
        """Accepted-but-missed tasks among all submissions."""
        return self.missed / self.submitted if self.submitted else 0.0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.submitted if self.submitted else 0.0


@dataclass
class RunResult:
    config: ScenarioConfig
    metrics: RunMetrics
    trace: list[dict] = field(default_factory=list)
    events_fired: int = 0


class World:
    """Builds and runs one scenario.

    With ``strict`` set, scheduler and accounting invariants are checked after
    every scheduler-side event and the run aborts with ``SimulationError`` on
    the first violation.
    """

    def __init__(self, config: ScenarioConfig, strict: bool = False):
        self.config = config
        self.strict = strict
        self.events = EventQueue()
        self.wireless = config.wireless_link()
        self.wired = config.wired_link()
        self.client_config = config.client_config()
        self.end_of_submissions: SimTime = int(round(config.duration_s * SECOND))

        rngs = spawn_rngs(config.seed, config.num_clients + 2)
        self.client_rngs = rngs[:config.num_clients]
        self.net_rng = rngs[-2]
        wired_rng = rngs[-1]

        if config.scheduler == "reference":
            self.scheduler = GlobalEDFScheduler(config.num_workers, self._dispatch)
        else:
            self.scheduler = LatencyAwareScheduler(config.scheduler_config(), self._dispatch)

        self.workers = [
            WorkerAgent(w, self.events,
                        exec_time=lambda task: self.client_config.actual_exec,
                        connect=self._connect,
                        report_preempted=self._report_preempted,
                        report_completion=self._report_completion,
                        send_result=self._send_result,
                        context_switch=config.context_switch_us)
            for w in range(config.num_workers)
        ]
        self.downlinks = [FifoChannel(self.events, self.wired, wired_rng) for _ in self.workers]
        self.uplinks = [FifoChannel(self.events, self.wired, wired_rng) for _ in self.workers]
        self.clients = [Client(c, self.client_config) for c in range(config.num_clients)]
        self._next_earliest = [0] * config.num_clients
        self._task_ids = 0
        self._records: dict[int, dict] = {}
        self._open: set[int] = set()
        self._accepted_ids: dict[int, bool] = {}
        self.accepted = 0
        self.rejected = 0

    # -- clients -----------------------------------------------------------

    def _schedule_first_submissions(self) -> None:
        for client in self.clients:
            gap = exponential_gap(self.client_config.arrival_rate, self.client_rngs[client.id])
            self._next_earliest[client.id] = gap
            if gap < self.end_of_submissions:
                self.events.post_at(gap, self._submit, client.id)

    def _submit(self, client_id: int) -> None:
        now = self.events.now
        rng = self.client_rngs[client_id]
        task = make_task(self._task_ids, client_id, now, self.client_config, self.wireless, rng)
        self._task_ids += 1
        self.clients[client_id].submit(task, now)
        self._records[task.id] = {
            "task_id": task.id, "client": client_id, "submit": now, "decision": None,
            "worker": None, "dispatches": 0, "preemptions": 0, "completion": None,
            "deadline": task.absolute_deadline, "verdict": None,
        }
        self._next_earliest[client_id] = now + exponential_gap(self.client_config.arrival_rate, rng)
        delay = transfer_time(self.wireless, task.payload_bytes, rng)
        self.events.post(delay, self._scheduler_receive, task)

    def _resolve(self, client_id: int, outcome: TaskOutcome) -> None:
        now = self.events.now
        client = self.clients[client_id]
        client.on_outcome(outcome, now)
        record = self._records[outcome.task_id]
        record["verdict"] = outcome.verdict.value
        record["completion"] = outcome.completion_time
        nxt = next_submission_time(client.submit_time, now,
                                   self._next_earliest[client_id] - client.submit_time)
        if nxt < self.end_of_submissions:
            self.events.post_at(nxt, self._submit, client_id)

    def _client_receive_reject(self, task: Task) -> None:
        record = self._records[task.id]
        self._resolve(task.client, TaskOutcome(task.id, Verdict.REJECTED, record["submit"],
                                               record["decision"]))

    def _client_receive_result(self, task: Task) -> None:
        record = self._records[task.id]
        outcome = TaskOutcome.for_result(task, record["submit"], record["decision"], self.events.now)
        self._resolve(task.client, outcome)

    # -- scheduler side ----------------------------------------------------

    def _scheduler_receive(self, task: Task) -> None:
        now = self.events.now
        self._records[task.id]["decision"] = now
        decision = self.scheduler.on_submission(task, now)
        self._accepted_ids[task.id] = isinstance(decision, Accept)
        if isinstance(decision, Accept):
            self.accepted += 1
            self._open.add(task.id)
        else:
            self.rejected += 1
            self.events.post(sample_one_way(self.wireless, self.net_rng),
                             self._client_receive_reject, task)
        self._check()

    def _dispatch(self, worker: int, task: Task) -> None:
        record = self._records[task.id]
        record["dispatches"] += 1
        record["worker"] = worker
        self.downlinks[worker].send(self._deliver, worker, task)

    def _deliver(self, worker: int, task: Task) -> None:
        for other in self.workers:
            if other.id != worker and other.holds(task.id):
                other.forget(task.id)
        self.workers[worker].on_receive_task(task)

    def _scheduler_preempted(self, worker: int, task_id: int, elapsed: int) -> None:
        self._records[task_id]["preemptions"] += 1
        self.scheduler.on_preempted(worker, task_id, elapsed, self.events.now)
        self._check()

    def _scheduler_completed(self, worker: int, task_id: int) -> None:
        self.scheduler.on_completion(worker, task_id, self.events.now)
        self._open.discard(task_id)
        self._check()

    # -- worker side -------------------------------------------------------

    def _connect(self, task: Task) -> int:
        return connection_setup_time(self.wireless, self.net_rng)

    def _report_preempted(self, worker: int, task_id: int, elapsed: int) -> None:
        self.uplinks[worker].send(self._scheduler_preempted, worker, task_id, elapsed)

    def _report_completion(self, worker: int, task_id: int, elapsed: int) -> None:
        self.uplinks[worker].send(self._scheduler_completed, worker, task_id)

    def _send_result(self, worker: int, task: Task) -> None:
        delay = transfer_time(self.wireless, task.result_payload_bytes, self.net_rng)
        self.events.post(delay, self._client_receive_result, task)

    # -- bookkeeping -------------------------------------------------------

    def _check(self) -> None:
        if not self.strict:
            return
        self.scheduler.check_invariants()
        if set(self.scheduler.outstanding()) != self._open:
            raise SimulationError("scheduler queues disagree with the set of accepted open tasks")

    def run(self, trace: bool = False) -> RunResult:
        self._schedule_first_submissions()
        self.events.drain(limit=self.end_of_submissions + DRAIN_LIMIT_S * SECOND)
        self.events.close()
        metrics = self._metrics()
        if self.strict:
            self._check_final(metrics)
        rows = [self._records[i] for i in sorted(self._records)] if trace else []
        for row in rows:
            row["worker"] = "" if row["worker"] is None else row["worker"]
        return RunResult(self.config, metrics, rows, self.events.fired)

    def _metrics(self) -> RunMetrics:
        clients = self.clients
        responses = [r for c in clients for r in c.response_times]
        leads = [lead for c in clients for lead in c.fallback_leads]
        return RunMetrics(
            submitted=sum(c.submitted for c in clients),
            accepted=self.accepted,
            rejected=self.rejected,
            completed_on_time=sum(c.on_time for c in clients),
            missed=sum(c.missed for c in clients),
            in_flight_at_end=sum(c.in_flight is not None for c in clients),
            mean_response_us=fmean(responses) if responses else 0.0,
            mean_fallback_lead_us=fmean(leads) if leads else 0.0,
        )

    def _check_final(self, m: RunMetrics) -> None:
        for client in self.clients:
            client.check_invariants()
        undecided = sum(1 for r in self._records.values() if r["decision"] is None)
        if m.submitted != m.accepted + m.rejected + undecided:
            raise SimulationError("submitted != accepted + rejected")
        accepted_in_flight = sum(1 for c in self.clients
                                 if c.in_flight is not None and self._accepted_ids.get(c.in_flight.id))
        if m.accepted != m.completed_on_time + m.missed + accepted_in_flight:
            raise SimulationError("accepted != on_time + missed + in_flight")
        if len(self.events) == 0 and self.events.posted != self.events.fired:
            raise SimulationError("events were lost")


def run_scenario(config: ScenarioConfig, strict: bool = False, trace: bool = False) -> RunResult:
    return World(config, strict=strict).run(trace=trace)
