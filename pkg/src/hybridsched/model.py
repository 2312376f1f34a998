"""Domain model for joint task placement and data-transfer scheduling.

A job is a DAG of computing tasks.  Tasks run on racks (one task per rack
at a time) and every edge of the DAG carries intermediate data that must
move from the producer's rack to the consumer's rack before the consumer
may start.  Data moves over one of three kinds of channel:

* ``local``    - producer and consumer share a rack; the data is written to
  local disk with a fixed delay and never contends with anything.
* ``wired``    - the single shared inter-rack wired channel; exclusive.
* ``wireless`` - one of the orthogonal wireless subchannels; each is
  exclusive while a transfer is in flight.

All times are exact non-negative integers (fixed-point, 1 ms per unit by
default) so that feasibility checks never depend on float comparisons.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Mapping

TimeUnits = int

# 1 time unit = 1 ms.  Data sizes are megabits, bandwidths megabits/second,
# so a transfer of d Mbit over B Mbps lasts ceil(d * 1000 / B) units.
TIME_UNITS_PER_SECOND = 1000


@dataclass(frozen=True)
class Task:
    """A computing task with a fixed processing time."""

    id: int
    processing_time: TimeUnits


@dataclass(frozen=True)
class DataEdge:
    """Dependency edge carrying ``data_size`` Mbit from producer to consumer.

    ``local_delay`` is the time the data takes to become available when both
    endpoints share a rack (0 when unspecified in instance files).
    """

    producer: int
    consumer: int
    data_size: int = 0
    local_delay: TimeUnits = 0

    @property
    def key(self) -> tuple[int, int]:
        return (self.producer, self.consumer)


@dataclass(frozen=True)
class JobGraph:
    """A DAG job: tasks plus data edges.  Use :func:`validate_job` to check it."""

    tasks: tuple[Task, ...]
    edges: tuple[DataEdge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", tuple(self.edges))
        by_id = {t.id: t for t in self.tasks}
        incoming: dict[int, list[DataEdge]] = {t.id: [] for t in self.tasks}
        outgoing: dict[int, list[DataEdge]] = {t.id: [] for t in self.tasks}
        for e in self.edges:
            if e.consumer in incoming:
                incoming[e.consumer].append(e)
            if e.producer in outgoing:
                outgoing[e.producer].append(e)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_incoming", incoming)
        object.__setattr__(self, "_outgoing", outgoing)

    def task(self, task_id: int) -> Task:
        return self._by_id[task_id]

    def has_task(self, task_id: int) -> bool:
        return task_id in self._by_id

    def processing(self, task_id: int) -> TimeUnits:
        return self._by_id[task_id].processing_time

    def task_ids(self) -> list[int]:
        return sorted(self._by_id)

    def in_edges(self, task_id: int) -> list[DataEdge]:
        return sorted(self._incoming[task_id], key=lambda e: e.key)

    def out_edges(self, task_id: int) -> list[DataEdge]:
        return sorted(self._outgoing[task_id], key=lambda e: e.key)


@dataclass(frozen=True)
class NetworkConfig:
    """Rack pool and channel capacities shared by one job's schedule."""

    rack_count: int
    subchannel_count: int = 0
    wired_bandwidth: int = 10_000
    wireless_bandwidth: int = 10_000

    def __post_init__(self) -> None:
        if self.rack_count < 1:
            raise ValueError("rack_count must be at least 1")
        if self.subchannel_count < 0:
            raise ValueError("subchannel_count must be non-negative")
        if self.wired_bandwidth <= 0 or self.wireless_bandwidth <= 0:
            raise ValueError("bandwidths must be positive")


@dataclass(frozen=True)
class ProblemInstance:
    job: JobGraph
    network: NetworkConfig


@dataclass(frozen=True)
class Channel:
    """One of the data channels: local disk, the wired link, or a subchannel.

    ``subchannel`` is 1-based and only meaningful for wireless channels.
    """

    kind: str
    subchannel: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("local", "wired", "wireless"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "wireless" and self.subchannel < 1:
            raise ValueError("wireless subchannel index is 1-based")
        if self.kind != "wireless" and self.subchannel != 0:
            raise ValueError(f"{self.kind} channel takes no subchannel index")

    @property
    def is_local(self) -> bool:
        return self.kind == "local"

    @property
    def is_wired(self) -> bool:
        return self.kind == "wired"

    @property
    def is_wireless(self) -> bool:
        return self.kind == "wireless"

    def sort_key(self) -> tuple[int, int]:
        order = {"local": 0, "wired": 1, "wireless": 2}
        return (order[self.kind], self.subchannel)


LOCAL = Channel("local")
WIRED = Channel("wired")


def wireless(subchannel: int) -> Channel:
    return Channel("wireless", subchannel)


@dataclass(frozen=True)
class TaskSlot:
    rack: int
    start: TimeUnits


@dataclass(frozen=True)
class EdgeSlot:
    channel: Channel
    start: TimeUnits


@dataclass(frozen=True)
class Schedule:
    """Placement and timing for every task and every edge of one job.

    ``task_slots`` maps task id to (rack, start); ``edge_slots`` maps the
    (producer, consumer) pair to (channel, transfer start).
    """

    task_slots: Mapping[int, TaskSlot] = field(default_factory=dict)
    edge_slots: Mapping[tuple[int, int], EdgeSlot] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "task_slots", dict(self.task_slots))
        object.__setattr__(self, "edge_slots", dict(self.edge_slots))


def validate_job(job: JobGraph) -> list[str]:
    """Return one message per structural defect; an empty list means valid.

    Checked defects: duplicate task ids, non-positive processing times,
    negative data sizes or local delays, dangling edge endpoints, duplicate
    edges, self-loops and longer dependency cycles.
    """
    errors: list[str] = []
    seen_ids: set[int] = set()
    for t in job.tasks:
        if t.id in seen_ids:
            errors.append(f"duplicate task: id {t.id} appears more than once")
        seen_ids.add(t.id)
        if t.processing_time <= 0:
            errors.append(
                f"non-positive time: task {t.id} has processing_time {t.processing_time}"
            )

    seen_edges: set[tuple[int, int]] = set()
    for e in job.edges:
        if e.producer not in seen_ids:
            errors.append(f"dangling endpoint: edge {e.key} producer {e.producer} unknown")
        if e.consumer not in seen_ids:
            errors.append(f"dangling endpoint: edge {e.key} consumer {e.consumer} unknown")
        if e.key in seen_edges:
            errors.append(f"duplicate edge: {e.key} appears more than once")
        seen_edges.add(e.key)
        if e.data_size < 0:
            errors.append(f"negative data size: edge {e.key} has d {e.data_size}")
        if e.local_delay < 0:
            errors.append(f"negative time: edge {e.key} has local_delay {e.local_delay}")
        if e.producer == e.consumer:
            errors.append(f"cycle: edge {e.key} is a self-loop")

    cycle = _find_cycle(job)
    if cycle:
        errors.append(f"cycle: tasks {cycle} form a dependency cycle")
    return errors


def _find_cycle(job: JobGraph) -> list[int]:
    """Return the ids of tasks on some dependency cycle, or [] if acyclic."""
    indegree = {t.id: 0 for t in job.tasks}
    for e in job.edges:
        if e.producer in indegree and e.consumer in indegree and e.producer != e.consumer:
            indegree[e.consumer] += 1
    ready = [v for v, d in sorted(indegree.items()) if d == 0]
    removed = 0
    while ready:
        v = ready.pop()
        removed += 1
        for e in job.out_edges(v):
            if e.consumer == e.producer or e.consumer not in indegree:
                continue
            indegree[e.consumer] -= 1
            if indegree[e.consumer] == 0:
                ready.append(e.consumer)
    if removed == len(indegree):
        return []
    return sorted(v for v, d in indegree.items() if d > 0)


def topological_order(job: JobGraph) -> list[int]:
    """Kahn's algorithm with ascending-id tie-breaking; raises on cycles."""
    indegree = {t.id: 0 for t in job.tasks}
    for e in job.edges:
        indegree[e.consumer] += 1
    heap = [v for v, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for e in job.out_edges(v):
            indegree[e.consumer] -= 1
            if indegree[e.consumer] == 0:
                heapq.heappush(heap, e.consumer)
    if len(order) != len(job.tasks):
        raise ValueError("job graph contains a cycle")
    return order


def _ceil_div(num: int, den: int) -> int:
    return -(-num // den)


def transfer_durations(edge: DataEdge, network: NetworkConfig) -> tuple[TimeUnits, TimeUnits]:
    """(wired, wireless) transfer times of an edge, rounded up to whole units.

    Rounding up keeps validated schedules realizable: a transfer is never
    reported shorter than the data actually needs.
    """
    scaled = edge.data_size * TIME_UNITS_PER_SECOND
    wired = _ceil_div(scaled, network.wired_bandwidth)
    wireless_time = _ceil_div(scaled, network.wireless_bandwidth)
    return wired, wireless_time


def channel_duration(edge: DataEdge, channel: Channel, network: NetworkConfig) -> TimeUnits:
    """Transfer time of ``edge`` on ``channel``."""
    if channel.is_local:
        return edge.local_delay
    wired, wireless_time = transfer_durations(edge, network)
    return wired if channel.is_wired else wireless_time


def makespan(schedule: Schedule, job: JobGraph) -> TimeUnits:
    """Completion time of the last task; 0 for an empty job."""
    latest = 0
    for t in job.tasks:
        slot = schedule.task_slots.get(t.id)
        if slot is None:
            raise ValueError(f"schedule has no slot for task {t.id}")
        latest = max(latest, slot.start + t.processing_time)
    return latest


def cross_rack_edges(job: JobGraph, rack_of: Mapping[int, int]) -> list[DataEdge]:
    """Edges whose endpoints sit on different racks under ``rack_of``."""
    return [e for e in job.edges if rack_of[e.producer] != rack_of[e.consumer]]


def job_from_lists(
    processing: Iterable[int],
    edges: Iterable[tuple] = (),
) -> JobGraph:
    """Convenience constructor: tasks 0..n-1 from processing times, edges as
    (u, v), (u, v, data_size) or (u, v, data_size, local_delay) tuples."""
    tasks = tuple(Task(i, p) for i, p in enumerate(processing))
    built = []
    for spec in edges:
        u, v = spec[0], spec[1]
        d = spec[2] if len(spec) > 2 else 0
        r = spec[3] if len(spec) > 3 else 0
        built.append(DataEdge(u, v, d, r))
    return JobGraph(tasks, tuple(built))
