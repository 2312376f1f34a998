"""Exhaustive optimum for tiny instances.

Enumerates every task-to-rack map, every channel map for cross-rack edges,
and every processing order on each exclusive resource (rack, wired channel,
subchannel), then realizes each combination as its earliest-start schedule
by longest-path propagation and keeps the minimum makespan.  For exclusive
non-preemptive resources some total order realizes every feasible sequence,
so the sweep is exhaustive.

Racks are interchangeable, as are subchannels, so assignments are walked in
first-use canonical form; the canonical form of a vector is also the
lexicographically smallest member of its relabeling orbit, which preserves
the documented tie rule (smallest assignment vector wins).

This module is the ground truth for solver tests and intentionally shares
no scheduling code with the solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

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
    validate_job,
    wireless,
)


@dataclass(frozen=True)
class OracleLimits:
    max_tasks: int = 5
    max_edges: int = 6
    max_racks: int = 3
    max_subchannels: int = 2


class LimitExceeded(ValueError):
    pass


def _check_limits(instance: ProblemInstance, limits: OracleLimits) -> None:
    job, network = instance.job, instance.network
    if len(job.tasks) > limits.max_tasks:
        raise LimitExceeded(f"{len(job.tasks)} tasks exceed the oracle limit {limits.max_tasks}")
    if len(job.edges) > limits.max_edges:
        raise LimitExceeded(f"{len(job.edges)} edges exceed the oracle limit {limits.max_edges}")
    if network.rack_count > limits.max_racks:
        raise LimitExceeded(f"{network.rack_count} racks exceed the oracle limit {limits.max_racks}")
    if network.subchannel_count > limits.max_subchannels:
        raise LimitExceeded(
            f"{network.subchannel_count} subchannels exceed the oracle limit "
            f"{limits.max_subchannels}"
        )


def _canonical_vectors(length: int, symbols: int) -> Iterator[tuple[int, ...]]:
    """All first-use-labeled vectors over 1..symbols, in lexicographic order."""

    def extend(prefix: list[int], used: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for s in range(1, min(symbols, used + 1) + 1):
            prefix.append(s)
            yield from extend(prefix, max(used, s))
            prefix.pop()

    yield from extend([], 0)


def _reachability(job: JobGraph) -> dict[int, set[int]]:
    """reach[v] = set of tasks reachable from v (v excluded)."""
    reach: dict[int, set[int]] = {v: set() for v in job.task_ids()}
    for v in reversed(topological_order(job)):
        for e in job.out_edges(v):
            reach[v].add(e.consumer)
            reach[v] |= reach[e.consumer]
    return reach


def _consistent_orders(
    items: Sequence, before: dict[tuple, set[tuple]]
) -> list[tuple]:
    """Permutations of ``items`` that respect the forced pairwise precedences."""
    orders = []
    for perm in itertools.permutations(items):
        position = {x: i for i, x in enumerate(perm)}
        ok = True
        for a, succs in before.items():
            if a not in position:
                continue
            for b in succs:
                if b in position and position[a] > position[b]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            orders.append(perm)
    return orders


def brute_force_optimal(
    instance: ProblemInstance, limits: OracleLimits = OracleLimits()
) -> tuple[TimeUnits, Schedule]:
    """Exact minimum makespan and one optimal schedule, by full enumeration."""
    _check_limits(instance, limits)
    job, network = instance.job, instance.network
    problems = validate_job(job)
    if problems:
        raise ValueError(f"invalid job: {problems[0]}")
    ids = job.task_ids()
    if not ids:
        return 0, Schedule()

    reach = _reachability(job)
    edges = sorted(job.edges, key=lambda e: e.key)
    durations = {e.key: transfer_durations(e, network) for e in edges}

    best_mk: TimeUnits | None = None
    best_schedule: Schedule | None = None

    for assignment in _canonical_vectors(len(ids), network.rack_count):
        rack_of = dict(zip(ids, assignment))
        cross = [e for e in edges if rack_of[e.producer] != rack_of[e.consumer]]

        # Forced order between two transfers: if the first one's consumer can
        # reach the second one's producer, the second cannot start earlier.
        edge_before: dict[tuple, set[tuple]] = {}
        for e1 in cross:
            for e2 in cross:
                if e1 is e2:
                    continue
                if e2.producer == e1.consumer or e2.producer in reach[e1.consumer]:
                    edge_before.setdefault(e1.key, set()).add(e2.key)
        task_before = {
            v: {w for w in reach[v] if rack_of[w] == rack_of[v]} for v in ids
        }

        rack_orders = []
        for rack in sorted(set(assignment)):
            members = [v for v in ids if rack_of[v] == rack]
            rack_orders.append(_consistent_orders(members, task_before))

        for chan_vector in _canonical_vectors(len(cross), network.subchannel_count + 1):
            # symbol 1 = wired, symbol k+1 = subchannel k
            chan_of = {
                e.key: WIRED if s == 1 else wireless(s - 1)
                for e, s in zip(cross, chan_vector)
            }
            groups: dict[Channel, list[tuple[int, int]]] = {}
            for e in cross:
                groups.setdefault(chan_of[e.key], []).append(e.key)
            chan_orders = [
                _consistent_orders(groups[c], edge_before)
                for c in sorted(groups, key=Channel.sort_key)
            ]

            for combo in itertools.product(*rack_orders, *chan_orders):
                result = _earliest_schedule(
                    job, rack_of, chan_of, durations, combo, best_mk
                )
                if result is None:
                    continue
                mk, schedule = result
                if best_mk is None or mk < best_mk:
                    best_mk, best_schedule = mk, schedule

    assert best_mk is not None and best_schedule is not None
    return best_mk, best_schedule


def _earliest_schedule(
    job: JobGraph,
    rack_of: dict[int, int],
    chan_of: dict[tuple[int, int], Channel],
    durations: dict[tuple[int, int], tuple[TimeUnits, TimeUnits]],
    chains: tuple[tuple, ...],
    cutoff: TimeUnits | None,
) -> tuple[TimeUnits, Schedule] | None:
    """Earliest-start realization of fixed assignments plus resource chains.

    Returns None when the chains contradict the precedence graph, or when
    the makespan provably reaches ``cutoff``.
    """
    # Nodes: task ids and cross-edge keys.  Arcs carry the source's duration.
    arcs: dict[object, list[tuple[object, TimeUnits]]] = {}
    indegree: dict[object, int] = {}

    def add_node(x) -> None:
        arcs.setdefault(x, [])
        indegree.setdefault(x, 0)

    def add_arc(a, b, w: TimeUnits) -> None:
        arcs[a].append((b, w))
        indegree[b] += 1

    for v in rack_of:
        add_node(v)
    for key in chan_of:
        add_node(key)

    proc = {v: job.processing(v) for v in rack_of}
    dur: dict[object, TimeUnits] = dict(proc)
    for key, channel in chan_of.items():
        wired_t, wireless_t = durations[key]
        dur[key] = wired_t if channel.is_wired else wireless_t

    for e in job.edges:
        if e.key in chan_of:
            add_arc(e.producer, e.key, proc[e.producer])
            add_arc(e.key, e.consumer, dur[e.key])
        else:
            add_arc(e.producer, e.consumer, proc[e.producer] + e.local_delay)
    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            add_arc(a, b, dur[a])

    est: dict[object, TimeUnits] = {x: 0 for x in arcs}
    ready = [x for x in arcs if indegree[x] == 0]
    settled = 0
    mk: TimeUnits = 0
    while ready:
        x = ready.pop()
        settled += 1
        finish = est[x] + dur[x]
        if isinstance(x, int):
            mk = max(mk, finish)
            if cutoff is not None and mk >= cutoff:
                return None
        for y, w in arcs[x]:
            if est[x] + w > est[y]:
                est[y] = est[x] + w
            indegree[y] -= 1
            if indegree[y] == 0:
                ready.append(y)
    if settled != len(arcs):
        return None  # contradictory chain ordering

    task_slots = {v: TaskSlot(rack_of[v], est[v]) for v in rack_of}
    edge_slots: dict[tuple[int, int], EdgeSlot] = {}
    for e in job.edges:
        if e.key in chan_of:
            edge_slots[e.key] = EdgeSlot(chan_of[e.key], est[e.key])
        else:
            edge_slots[e.key] = EdgeSlot(LOCAL, est[e.producer] + proc[e.producer])
    return mk, Schedule(task_slots, edge_slots)


def enumerate_gain(
    instance: ProblemInstance, limits: OracleLimits = OracleLimits()
) -> tuple[TimeUnits, TimeUnits]:
    """(wired-only optimum, optimum with the instance's subchannels)."""
    wired_net = replace(instance.network, subchannel_count=0)
    wired_only, _ = brute_force_optimal(ProblemInstance(instance.job, wired_net), limits)
    with_wireless, _ = brute_force_optimal(instance, limits)
    return wired_only, with_wireless
