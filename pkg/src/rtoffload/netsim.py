"""Seeded discrete-event engine and the link latency model.

Randomness comes from :class:`numpy.random.Generator` over PCG64; a given seed
and an identical sequence of draws yields a bit-identical sample stream.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .core import SimTime


class SimulationError(RuntimeError):
    """Internal-consistency violation; the run cannot continue."""


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """``n`` independent generators derived deterministically from one seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class LinkModel:
    """One-way delay model of a link, all durations in microseconds.

    ``bandwidth`` is in bytes per second; ``None`` means transfer size is free.
    """

    one_way_mean: int
    one_way_stddev: int = 0
    min_latency: int = 1_000
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if self.one_way_mean < 0 or self.one_way_stddev < 0 or self.min_latency < 0:
            raise ValueError(f"link parameters must be non-negative: {self}")
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive when set, got {self.bandwidth}")


def sample_one_way(link: LinkModel, rng: np.random.Generator) -> int:
    if link.one_way_stddev == 0:
        return max(link.one_way_mean, link.min_latency)
    sample = rng.normal(link.one_way_mean, link.one_way_stddev)
    return max(int(round(sample)), link.min_latency)


def transfer_time(link: LinkModel, payload_bytes: int, rng: np.random.Generator) -> int:
    if payload_bytes < 0:
        raise ValueError(f"payload_bytes must be >= 0, got {payload_bytes}")
    latency = sample_one_way(link, rng)
    if link.bandwidth is None or payload_bytes == 0:
        return latency
    return latency + math.ceil(payload_bytes * 1_000_000 / link.bandwidth)


def connection_setup_time(link: LinkModel, rng: np.random.Generator) -> int:
    """SYN plus SYN-ACK, i.e. two independent one-way samples."""
    syn = sample_one_way(link, rng)
    return syn + sample_one_way(link, rng)


class EventQueue:
    """Min-heap of ``(fire_time, seq, handler, args)``; equal times fire in posting order."""

    def __init__(self):
        self.now: SimTime = 0
        self._heap: list[tuple[int, int, Callable[..., Any], tuple]] = []
        self._seq = itertools.count()
        self.posted = 0
        self.fired = 0
        self.closed = False

    def __len__(self):
        return len(self._heap)

    def post(self, delay: int, handler: Callable[..., Any], *args) -> None:
        if self.closed:
            raise SimulationError("event posted after the run completed")
        if delay < 0:
            raise ValueError(f"negative event delay {delay}")
        heapq.heappush(self._heap, (self.now + delay, next(self._seq), handler, args))
        self.posted += 1

    def post_at(self, when: SimTime, handler: Callable[..., Any], *args) -> None:
        self.post(when - self.now, handler, *args)

    def next_time(self) -> Optional[SimTime]:
        return self._heap[0][0] if self._heap else None

    def step(self) -> None:
        when, _, handler, args = heapq.heappop(self._heap)
        self.now = when
        self.fired += 1
        handler(*args)

    def run_until(self, t_end: SimTime) -> None:
        """Fire every event with ``fire_time <= t_end`` and leave ``now == t_end``."""
        if t_end < self.now:
            raise ValueError(f"cannot run backwards from {self.now} to {t_end}")
        while self._heap and self._heap[0][0] <= t_end:
            self.step()
        self.now = t_end

    def drain(self, limit: Optional[SimTime] = None) -> None:
        """Fire events until none remain (or the next one lies beyond ``limit``)."""
        while self._heap and (limit is None or self._heap[0][0] <= limit):
            self.step()

    def close(self) -> None:
        self.closed = True


class FifoChannel:
    """Point-to-point message channel that never reorders deliveries.

    A jittered sample that would overtake an earlier message is held back until
    that message has been delivered, as a TCP stream would.
    """

    def __init__(self, events: EventQueue, link: LinkModel, rng: np.random.Generator):
        self.events = events
        self.link = link
        self.rng = rng
        self._last_delivery: SimTime = 0

    def send(self, handler: Callable[..., Any], *args, payload_bytes: int = 0) -> SimTime:
        arrival = self.events.now + transfer_time(self.link, payload_bytes, self.rng)
        arrival = max(arrival, self._last_delivery)
        self._last_delivery = arrival
        self.events.post_at(arrival, handler, *args)
        return arrival
