import pytest
from hypothesis import given, strategies as st

from rtoffload.core import (DeadlinePassed, Task, TaskOutcome, Verdict, density, laxity,
                            remaining_wcet)

NOW = 1_000_000


def task(deadline_in, wcet, elapsed=0, **kw):
    return Task(id=1, client=0, absolute_deadline=NOW + deadline_in,
                initial_relative_deadline=kw.pop("t_r", max(deadline_in, 1)),
                connection_setup_time=0, wcet=wcet, elapsed_execution=elapsed, **kw)


@pytest.mark.parametrize("deadline_in, wcet, elapsed, expected", [
    (100_000, 30_000, 0, 70_000),
    (100_000, 100_000, 0, 0),
    (50_000, 100_000, 20_000, -30_000),
])
def test_laxity(deadline_in, wcet, elapsed, expected):
    assert laxity(task(deadline_in, wcet, elapsed), NOW) == expected


@pytest.mark.parametrize("deadline_in, wcet, elapsed, expected", [
    (100_000, 50_000, 0, 0.5),
    (10_000, 100_000, 100_000, 0.0),
    (100_000, 100_000, 0, 1.0),
])
def test_density(deadline_in, wcet, elapsed, expected):
    assert density(task(deadline_in, wcet, elapsed), NOW) == expected


def test_density_rejects_expired_task():
    expired = task(1, 10)
    with pytest.raises(DeadlinePassed):
        density(expired, NOW + 1)
    with pytest.raises(DeadlinePassed):
        density(expired, NOW + 5)


@pytest.mark.parametrize("elapsed, expected", [(30_000, 70_000), (100_000, 0), (0, 100_000)])
def test_remaining_wcet(elapsed, expected):
    assert remaining_wcet(task(200_000, 100_000, elapsed)) == expected


@pytest.mark.parametrize("kw", [dict(wcet=0), dict(t_r=0), dict(elapsed=11, wcet=10)])
def test_task_validation(kw):
    wcet = kw.pop("wcet", 10)
    elapsed = kw.pop("elapsed", 0)
    with pytest.raises(ValueError):
        task(100, wcet, elapsed, **kw)


times = st.integers(0, 10**9)


@given(deadline=times, now=times, wcet=st.integers(1, 10**6), frac=st.floats(0, 1))
def test_laxity_plus_remaining_is_time_to_deadline(deadline, now, wcet, frac):
    t = Task(1, 0, deadline, 1, 0, wcet, int(wcet * frac))
    assert laxity(t, now) + remaining_wcet(t) == deadline - now


@given(window=st.integers(1, 10**6), extra=st.integers(1, 10**6), wcet=st.integers(1, 10**6))
def test_density_monotonicity(window, extra, wcet):
    near = task(window, wcet)
    far = task(window + extra, wcet)
    assert density(far, NOW) < density(near, NOW)
    heavier = task(window, wcet + extra)
    assert density(heavier, NOW) > density(near, NOW)


def test_outcome_deadline_is_inclusive():
    t = task(100, 10)
    assert TaskOutcome.for_result(t, 0, 5, t.absolute_deadline).verdict is Verdict.COMPLETED_ON_TIME
    assert TaskOutcome.for_result(t, 0, 5, t.absolute_deadline + 1).verdict is Verdict.MISSED_DEADLINE
