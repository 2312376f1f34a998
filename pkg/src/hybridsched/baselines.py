"""Reference schedulers: single-rack, earliest-finish list, and random.

All three share one greedy realization step.  Tasks are visited in
topological order (ids break ties) and appended to their rack's queue;
each incoming cross-rack transfer grabs the network channel on which it
can start earliest, wired winning ties, then lower subchannel indices.
Bookings are append-only, so the realization always emits a feasible
schedule whatever rack choices drive it.
"""

from __future__ import annotations

import random
from typing import Mapping

from .model import (
    LOCAL,
    WIRED,
    Channel,
    EdgeSlot,
    JobGraph,
    ProblemInstance,
    Schedule,
    TaskSlot,
    TimeUnits,
    topological_order,
    transfer_durations,
    wireless,
)


def _network_channels(subchannel_count: int) -> list[Channel]:
    return [WIRED] + [wireless(k) for k in range(1, subchannel_count + 1)]


class _GreedyState:
    """Append-only availability bookkeeping for racks and channels."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.rack_free: dict[int, TimeUnits] = {
            i: 0 for i in range(1, instance.network.rack_count + 1)
        }
        self.channel_free: dict[Channel, TimeUnits] = {
            c: 0 for c in _network_channels(instance.network.subchannel_count)
        }
        self.task_slots: dict[int, TaskSlot] = {}
        self.edge_slots: dict[tuple[int, int], EdgeSlot] = {}

    def place(self, v: int, rack: int, commit: bool) -> TimeUnits:
        """Start v on ``rack`` as early as possible; returns its finish time.

        With ``commit`` false the state is left untouched (used to evaluate
        candidate racks).
        """
        job, network = self.instance.job, self.instance.network
        channel_free = self.channel_free if commit else dict(self.channel_free)
        edge_slots: dict[tuple[int, int], EdgeSlot] = {}

        ready: TimeUnits = 0
        for e in job.in_edges(v):
            u_slot = self.task_slots[e.producer]
            data_ready = u_slot.start + job.processing(e.producer)
            if u_slot.rack == rack:
                edge_slots[e.key] = EdgeSlot(LOCAL, data_ready)
                arrival = data_ready + e.local_delay
            else:
                wired_time, wireless_time = transfer_durations(e, network)
                best: tuple[TimeUnits, tuple[int, int], Channel] | None = None
                for c in _network_channels(network.subchannel_count):
                    start = max(channel_free[c], data_ready)
                    if best is None or (start, c.sort_key()) < (best[0], best[1]):
                        best = (start, c.sort_key(), c)
                assert best is not None
                start, _, channel = best
                duration = wired_time if channel.is_wired else wireless_time
                channel_free[channel] = start + duration
                edge_slots[e.key] = EdgeSlot(channel, start)
                arrival = start + duration
            ready = max(ready, arrival)

        start_v = max(self.rack_free[rack], ready)
        finish = start_v + job.processing(v)
        if commit:
            self.rack_free[rack] = finish
            self.task_slots[v] = TaskSlot(rack, start_v)
            self.edge_slots.update(edge_slots)
        return finish


def _realize(instance: ProblemInstance, rack_of: Mapping[int, int]) -> Schedule:
    state = _GreedyState(instance)
    for v in topological_order(instance.job):
        state.place(v, rack_of[v], commit=True)
    return Schedule(state.task_slots, state.edge_slots)


def single_rack_schedule(instance: ProblemInstance) -> Schedule:
    """Everything on rack 1, back to back in topological order."""
    return _realize(instance, {t.id: 1 for t in instance.job.tasks})


def list_schedule(instance: ProblemInstance) -> Schedule:
    """Earliest-finish-time list scheduling over all racks."""
    state = _GreedyState(instance)
    racks = range(1, instance.network.rack_count + 1)
    for v in topological_order(instance.job):
        best_rack = min(racks, key=lambda i: (state.place(v, i, commit=False), i))
        state.place(v, best_rack, commit=True)
    return Schedule(state.task_slots, state.edge_slots)


def random_schedule(instance: ProblemInstance, seed: int) -> Schedule:
    """Racks drawn uniformly per task; timing stays greedy, so the result is
    always feasible."""
    rng = random.Random(seed)
    rack_of = {
        v: rng.randint(1, instance.network.rack_count) for v in instance.job.task_ids()
    }
    return _realize(instance, rack_of)
