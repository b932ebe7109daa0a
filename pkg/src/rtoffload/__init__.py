"""Discrete-event simulator for offloading real-time tasks over a jittery wireless network.

Clients submit deadline-constrained tasks to a latency-aware partitioned EDF
scheduler, which dispatches them to preemptable workers; a global-EDF
reference scheduler is available for comparison.
"""

from .baseline import GlobalEDFScheduler
from .core import Task, TaskOutcome, Verdict, density, laxity, remaining_wcet
from .scheduler import (Accept, AdjustedTask, Heuristic, LatencyAwareScheduler, Reject,
                        RejectReason, SchedulerConfig, WorkerQueueState, adjust_deadline,
                        admission_precheck, feasible_with, queue_density, select_worker)

__version__ = "0.1.0"
