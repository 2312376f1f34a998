"""Feasibility validator for complete schedules.

Every rule a schedule can break is reported as a :class:`Violation` drawn
from a closed rule set:

* ``non-repetition``      - a task is not placed on exactly one valid rack
* ``rack-overlap``        - two tasks on one rack run at the same time
* ``precedence``          - a task starts before time zero
* ``transfer-start``      - a transfer starts before its producer finishes
                            (or before time zero)
* ``transfer-completion`` - a consumer starts before its data has arrived
* ``wired-overlap``       - two wired transfers are in flight together
* ``wireless-overlap``    - two transfers share a subchannel interval, or a
                            transfer uses a subchannel the network lacks
* ``channel-coupling``    - channel choice contradicts the rack placement
                            (local iff co-located)

Local transfers never conflict with each other: local disk behaves like a
channel of unbounded capacity with a fixed per-edge delay.

The validator expects a structurally complete schedule (a slot for every
task and every edge, and no slots for unknown ones); anything else raises
``ValueError``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Channel,
    DataEdge,
    EdgeSlot,
    JobGraph,
    NetworkConfig,
    ProblemInstance,
    Schedule,
    TimeUnits,
    channel_duration,
)

RULES = (
    "non-repetition",
    "rack-overlap",
    "precedence",
    "transfer-start",
    "transfer-completion",
    "wired-overlap",
    "wireless-overlap",
    "channel-coupling",
)


@dataclass(frozen=True)
class Violation:
    rule: str
    subjects: tuple
    detail: str


def _check_complete(job: JobGraph, schedule: Schedule) -> None:
    for t in job.tasks:
        if t.id not in schedule.task_slots:
            raise ValueError(f"incomplete schedule: task {t.id} has no slot")
    known = {t.id for t in job.tasks}
    for task_id in schedule.task_slots:
        if task_id not in known:
            raise ValueError(f"schedule places unknown task {task_id}")
    edge_keys = {e.key for e in job.edges}
    for e in job.edges:
        if e.key not in schedule.edge_slots:
            raise ValueError(f"incomplete schedule: edge {e.key} has no slot")
    for key in schedule.edge_slots:
        if key not in edge_keys:
            raise ValueError(f"schedule routes unknown edge {key}")


def _overlap(s1: TimeUnits, d1: TimeUnits, s2: TimeUnits, d2: TimeUnits) -> bool:
    """Half-open intervals [s, s+d); zero-length intervals never overlap."""
    if d1 <= 0 or d2 <= 0:
        return False
    return s1 < s2 + d2 and s2 < s1 + d1


def validate_schedule(instance: ProblemInstance, schedule: Schedule) -> list[Violation]:
    """All feasibility violations of ``schedule``; an empty list means feasible."""
    job, network = instance.job, instance.network
    _check_complete(job, schedule)
    out: list[Violation] = []

    # Task placement and start-time sanity.
    for v in job.task_ids():
        slot = schedule.task_slots[v]
        if not 1 <= slot.rack <= network.rack_count:
            out.append(
                Violation(
                    "non-repetition",
                    (v,),
                    f"task {v} assigned to rack {slot.rack}, outside 1..{network.rack_count}",
                )
            )
        if slot.start < 0:
            out.append(
                Violation("precedence", (v,), f"task {v} starts at {slot.start}, before time zero")
            )

    # One task at a time per rack.
    ids = job.task_ids()
    for a_pos, v in enumerate(ids):
        for w in ids[a_pos + 1 :]:
            sv, sw = schedule.task_slots[v], schedule.task_slots[w]
            if sv.rack != sw.rack:
                continue
            if _overlap(sv.start, job.processing(v), sw.start, job.processing(w)):
                out.append(
                    Violation(
                        "rack-overlap",
                        (v, w),
                        f"tasks {v} and {w} overlap on rack {sv.rack}",
                    )
                )

    # Per-edge channel coupling and timing.
    for e in sorted(job.edges, key=lambda e: e.key):
        slot = schedule.edge_slots[e.key]
        u_slot = schedule.task_slots[e.producer]
        v_slot = schedule.task_slots[e.consumer]
        co_located = u_slot.rack == v_slot.rack
        if co_located != slot.channel.is_local:
            expected = "local" if co_located else "a network channel"
            out.append(
                Violation(
                    "channel-coupling",
                    (e.key,),
                    f"edge {e.key} uses {slot.channel.kind} but requires {expected}",
                )
            )
            continue  # duration on the wrong channel kind is meaningless
        if slot.channel.is_wireless and slot.channel.subchannel > network.subchannel_count:
            out.append(
                Violation(
                    "wireless-overlap",
                    (e.key,),
                    f"edge {e.key} uses subchannel {slot.channel.subchannel}, "
                    f"network has {network.subchannel_count}",
                )
            )
            continue
        if slot.start < 0:
            out.append(
                Violation(
                    "transfer-start", (e.key,), f"edge {e.key} transfer starts at {slot.start}"
                )
            )
        ready = u_slot.start + job.processing(e.producer)
        if slot.start < ready:
            out.append(
                Violation(
                    "transfer-start",
                    (e.key,),
                    f"edge {e.key} transfer starts at {slot.start}, producer finishes at {ready}",
                )
            )
        arrival = slot.start + channel_duration(e, slot.channel, network)
        if v_slot.start < arrival:
            out.append(
                Violation(
                    "transfer-completion",
                    (e.key,),
                    f"edge {e.key} arrives at {arrival}, consumer starts at {v_slot.start}",
                )
            )

    # Channel exclusivity: the wired channel and each subchannel carry one
    # flow at a time.
    out.extend(_channel_conflicts(job, network, schedule))
    return out


def _channel_conflicts(
    job: JobGraph, network: NetworkConfig, schedule: Schedule
) -> list[Violation]:
    by_channel: dict[Channel, list[tuple[tuple[int, int], TimeUnits, TimeUnits]]] = {}
    for e in sorted(job.edges, key=lambda e: e.key):
        slot = schedule.edge_slots[e.key]
        if slot.channel.is_local:
            continue
        if slot.channel.is_wireless and slot.channel.subchannel > network.subchannel_count:
            continue  # already reported
        duration = channel_duration(e, slot.channel, network)
        by_channel.setdefault(slot.channel, []).append((e.key, slot.start, duration))

    out: list[Violation] = []
    for channel in sorted(by_channel, key=Channel.sort_key):
        flows = by_channel[channel]
        rule = "wired-overlap" if channel.is_wired else "wireless-overlap"
        for i, (key1, s1, d1) in enumerate(flows):
            for key2, s2, d2 in flows[i + 1 :]:
                if _overlap(s1, d1, s2, d2):
                    where = "wired channel" if channel.is_wired else f"subchannel {channel.subchannel}"
                    out.append(
                        Violation(rule, (key1, key2), f"edges {key1} and {key2} overlap on the {where}")
                    )
    return out
