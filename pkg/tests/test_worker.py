import pytest

from rtoffload.core import Task
from rtoffload.netsim import EventQueue, SimulationError
from rtoffload.worker import WorkerAgent


def task(tid, wcet=100_000, elapsed=0):
    return Task(id=tid, client=0, absolute_deadline=1_000_000, initial_relative_deadline=1_000_000,
                connection_setup_time=0, wcet=wcet, elapsed_execution=elapsed)


class Harness:
    """A worker whose outbound calls are recorded with their event time."""

    def __init__(self, actual=None, conn=0, context_switch=0):
        self.events = EventQueue()
        self.actual = actual or {}
        self.conn = conn
        self.log = []
        self.agent = WorkerAgent(
            0, self.events,
            exec_time=lambda t: self.actual.get(t.id, 30_000),
            connect=lambda t: self.conn,
            report_preempted=lambda w, tid, e: self.log.append(("preempted", tid, e, self.events.now)),
            report_completion=lambda w, tid, e: self.log.append(("completed", tid, e, self.events.now)),
            send_result=lambda w, t: self.log.append(("result", t.id, None, self.events.now)),
            context_switch=context_switch)

    def deliver_at(self, when, t):
        self.events.post_at(when, self.agent.on_receive_task, t)

    def run(self):
        self.events.drain()
        return self.log


def test_idle_worker_completes_after_actual_exec():
    h = Harness()
    h.deliver_at(1_000, task(1))
    assert ("completed", 1, 30_000, 31_000) in h.run()


def test_preempted_progress_is_recorded():
    h = Harness(actual={1: 30_000, 2: 5_000})
    h.deliver_at(0, task(1))
    h.deliver_at(12_000, task(2))
    h.run()
    assert h.log[0] == ("preempted", 1, 12_000, 12_000)
    assert [e.task.id for e in h.agent.suspended] == [1]
    assert h.agent.suspended[0].executed == 12_000


def test_completion_wins_a_tie_with_a_preemption():
    h = Harness()
    h.deliver_at(0, task(1))
    h.events.run_until(1)
    h.deliver_at(30_000, task(2))  # posted after the completion event for the same instant
    log = h.run()
    assert log[0] == ("completed", 1, 30_000, 30_000)
    assert not any(entry[0] == "preempted" for entry in log)


@pytest.mark.parametrize("conn, send_at", [(40_000, 40_000), (20_000, 30_000)])
def test_result_waits_for_the_connection(conn, send_at):
    h = Harness(conn=conn)
    h.deliver_at(0, task(1))
    assert ("result", 1, None, send_at) in h.run()


def test_elapsed_excludes_time_spent_preempted():
    h = Harness(actual={1: 30_000, 2: 15_000})
    h.deliver_at(0, task(1))
    h.deliver_at(10_000, task(2))
    h.events.run_until(25_000)
    assert ("completed", 2, 15_000, 25_000) in h.log
    assert h.agent.idle  # the suspended task waits for the scheduler
    h.deliver_at(25_000, task(1, elapsed=10_000))
    h.run()
    assert h.log[-2] == ("completed", 1, 30_000, 45_000)


def test_context_switch_delays_resumption():
    h = Harness(actual={1: 30_000, 2: 15_000}, context_switch=500)
    h.deliver_at(0, task(1))
    h.deliver_at(10_000, task(2))
    h.run()
    assert ("completed", 2, 15_000, 25_500) in h.log


def test_migrated_task_starts_from_reported_elapsed():
    h = Harness(actual={1: 30_000})
    h.deliver_at(0, task(1, elapsed=12_000))
    assert ("completed", 1, 30_000, 18_000) in h.run()


def test_duplicate_task_aborts():
    h = Harness()
    h.deliver_at(0, task(1))
    h.deliver_at(5, task(1))
    with pytest.raises(SimulationError):
        h.run()


def test_missing_connection_aborts():
    h = Harness()
    with pytest.raises(SimulationError):
        h.agent.on_execution_complete(task(9), 30_000)


def test_forget_drops_suspended_copy():
    h = Harness(actual={1: 30_000, 2: 50_000})
    h.deliver_at(0, task(1))
    h.deliver_at(1_000, task(2))
    h.events.run_until(2_000)
    assert h.agent.holds(1)
    h.agent.forget(1)
    assert not h.agent.holds(1) and 1 not in h.agent.conn_ready_at
