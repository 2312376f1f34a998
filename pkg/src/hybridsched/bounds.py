"""Makespan bounds used to seed and terminate the exact search.

``upper_bound`` is the job completion time of the trivial scheme that puts
every task on one rack in topological order, with every transfer local.

``longest_branch`` is a critical-path lower bound: after shifting each
task's processing time onto its outgoing edges, the longest path through
the DAG (plus the final task's processing time) bounds any schedule from
below.  Called with just the job, the per-edge cost adds the local-transfer
delay, which matches the single-rack reading of the path.  When a network
is supplied, the edge cost uses the cheapest channel available to the edge
(local, wired, or wireless when subchannels exist) so the bound stays valid
on instances where shipping data over the network beats the local delay.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    JobGraph,
    NetworkConfig,
    TimeUnits,
    topological_order,
    transfer_durations,
)


@dataclass(frozen=True)
class BoundPair:
    lower: TimeUnits
    upper: TimeUnits

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


def upper_bound(job: JobGraph) -> TimeUnits:
    """Sum of all processing times and all local-transfer delays."""
    return sum(t.processing_time for t in job.tasks) + sum(e.local_delay for e in job.edges)


def longest_branch(job: JobGraph, network: NetworkConfig | None = None) -> TimeUnits:
    """Longest-path lower bound; see the module docstring for the edge cost."""
    if not job.tasks:
        return 0
    dist = {v: 0 for v in job.task_ids()}
    for v in topological_order(job):
        p_v = job.processing(v)
        for e in job.out_edges(v):
            cost = p_v + _edge_cost(e, network)
            if dist[v] + cost > dist[e.consumer]:
                dist[e.consumer] = dist[v] + cost
    return max(dist[v] + job.processing(v) for v in dist)


def _edge_cost(e, network: NetworkConfig | None) -> TimeUnits:
    if network is None:
        return e.local_delay
    wired, wireless_time = transfer_durations(e, network)
    best = min(e.local_delay, wired)
    if network.subchannel_count > 0:
        best = min(best, wireless_time)
    return best


def bound_pair(job: JobGraph, network: NetworkConfig | None = None) -> BoundPair:
    return BoundPair(longest_branch(job, network), upper_bound(job))
