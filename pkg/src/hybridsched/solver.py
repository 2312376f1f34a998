"""Exact makespan minimization.

The optimum is found by bisecting the integer interval between a lower
bound (the longest branch, reinforced by the total-work/rack-count
energetic argument) and the single-rack upper bound.  Each level is
answered by a depth-first feasibility search that places tasks in
topological order, branching on

* the rack of the task (racks are interchangeable, so only already-used
  racks plus one fresh rack are tried),
* the channel of every incoming cross-rack edge (wired first, then
  subchannels, again with fresh-channel symmetry breaking), and
* the insertion position of the new task/transfer in its resource's
  processing sequence.

After every decision, earliest start times are propagated through the
precedence graph, the committed resource sequences, and optimistic
minimum-duration arcs for the not-yet-routed edges; a branch dies as soon
as the propagated completion of any task exceeds the level.  Infeasibility
of a level is certified only by exhausting this tree (or by a bound
argument); hitting a node or time limit downgrades the answer to unknown.

All event times are sums of integer durations, so the optimum is an
integer and the bisection terminates exactly.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, replace

from .baselines import list_schedule, single_rack_schedule
from .bounds import longest_branch, upper_bound
from .model import (
    LOCAL,
    WIRED,
    EdgeSlot,
    ProblemInstance,
    Schedule,
    TaskSlot,
    TimeUnits,
    makespan,
    topological_order,
    transfer_durations,
    validate_job,
    wireless,
)

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"

YES = "yes"
NO = "no"

# channel codes inside the search
_UNROUTED = -1
_LOCAL = 0
_WIRED = 1  # wireless subchannel k is _WIRED + k


@dataclass(frozen=True)
class SolverConfig:
    """Search limits.  ``deterministic_seed`` randomizes branching order only
    (the answer stays exact); leave it None for fully reproducible branching."""

    node_limit: int | None = None
    time_limit: float | None = None
    deterministic_seed: int | None = None

    def __post_init__(self) -> None:
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class SolverResult:
    status: str
    schedule: Schedule | None
    makespan: TimeUnits | None
    interval: tuple[TimeUnits, TimeUnits]
    nodes_explored: int
    bisection_iterations: int


class _Exhausted(Exception):
    pass


class _Budget:
    __slots__ = ("nodes_left", "deadline", "spent", "tick")

    def __init__(self, node_limit: int | None, time_limit: float | None):
        self.nodes_left = node_limit
        self.deadline = time.monotonic() + time_limit if time_limit else None
        self.spent = 0
        self.tick = 0

    def spend(self) -> None:
        self.spent += 1
        if self.nodes_left is not None:
            self.nodes_left -= 1
            if self.nodes_left < 0:
                raise _Exhausted
        if self.deadline is not None:
            self.tick += 1
            if self.tick >= 256:
                self.tick = 0
                if time.monotonic() > self.deadline:
                    raise _Exhausted


class _FeasibilitySearch:
    """One depth-first feasibility run at a fixed level.

    Tasks are referenced by their position in the topological order, edges
    by their position in the key-sorted edge list; channels are small ints
    (0 local, 1 wired, 1+k subchannel k).
    """

    def __init__(
        self,
        instance: ProblemInstance,
        level: TimeUnits,
        budget: _Budget,
        rng: random.Random | None,
    ):
        job, network = instance.job, instance.network
        self.network = network
        self.job = job
        self.level = level
        self.budget = budget
        self.rng = rng

        self.order = topological_order(job)
        self.n = n = len(self.order)
        tidx = {v: i for i, v in enumerate(self.order)}
        self.proc = [job.processing(v) for v in self.order]

        self.edges = sorted(job.edges, key=lambda e: e.key)
        self.m = m = len(self.edges)
        self.edge_u = [tidx[e.producer] for e in self.edges]
        self.edge_v = [tidx[e.consumer] for e in self.edges]
        self.edge_delay = [e.local_delay for e in self.edges]
        self.edge_wired: list[int] = []
        self.edge_wireless: list[int] = []
        self.edge_min: list[int] = []
        for e in self.edges:
            q, qw = transfer_durations(e, network)
            self.edge_wired.append(q)
            self.edge_wireless.append(qw)
            best = min(e.local_delay, q)
            if network.subchannel_count > 0:
                best = min(best, qw)
            self.edge_min.append(best)

        self.in_edges: list[list[int]] = [[] for _ in range(n)]
        for ei in range(m):
            self.in_edges[self.edge_v[ei]].append(ei)
        for lst in self.in_edges:  # most constrained (longest transfer) first
            lst.sort(key=lambda ei: (-max(self.edge_wired[ei], self.edge_wireless[ei]), ei))

        # cheapest network-only duration (a cross edge cannot go local)
        if network.subchannel_count > 0:
            self.net_min = [min(q, qw) for q, qw in zip(self.edge_wired, self.edge_wireless)]
        else:
            self.net_min = list(self.edge_wired)

        # minimum time from a task's start to the end of the job
        out_edges: list[list[int]] = [[] for _ in range(n)]
        for ei in range(m):
            out_edges[self.edge_u[ei]].append(ei)
        self.tail = [0] * n
        for t in range(n - 1, -1, -1):
            downstream = 0
            for ei in out_edges[t]:
                reach = self.edge_min[ei] + self.tail[self.edge_v[ei]]
                if reach > downstream:
                    downstream = reach
            self.tail[t] = self.proc[t] + downstream

        self.rack_of = [0] * n  # 0 = unplaced
        self.chan_of = [_UNROUTED] * m
        self.rack_seq: list[list[int]] = [[] for _ in range(network.rack_count + 1)]
        self.chan_seq: list[list[int]] = [
            [] for _ in range(network.subchannel_count + 2)
        ]  # index 1 wired, 1+k subchannel k
        self.racks_used = 0
        self.subch_used = 0
        self.est = [0] * (n + m)

    # -- propagation ---------------------------------------------------

    def _propagate(self) -> bool:
        """Earliest-start propagation over tasks and routed transfers.

        Unrouted edges contribute optimistic minimum-duration arcs, so the
        computed starts are valid lower bounds for any completion of the
        current partial placement.  Returns False when the sequences clash
        (cycle) or some task provably finishes after the level.
        """
        n, m = self.n, self.m
        total = n + m
        adj: list[list[tuple[int, int]]] = [[] for _ in range(total)]
        indeg = [0] * total
        proc = self.proc
        dur = proc + [0] * m
        chan_of = self.chan_of
        count = n

        for ei in range(m):
            u, v = self.edge_u[ei], self.edge_v[ei]
            channel = chan_of[ei]
            if channel == _UNROUTED:
                adj[u].append((v, proc[u] + self.edge_min[ei]))
                indeg[v] += 1
            elif channel == _LOCAL:
                adj[u].append((v, proc[u] + self.edge_delay[ei]))
                indeg[v] += 1
            else:
                node = n + ei
                count += 1
                dur[node] = (
                    self.edge_wired[ei] if channel == _WIRED else self.edge_wireless[ei]
                )
                adj[u].append((node, proc[u]))
                indeg[node] += 1
                adj[node].append((v, dur[node]))
                indeg[v] += 1

        for seq in self.rack_seq:
            for a, b in zip(seq, seq[1:]):
                adj[a].append((b, proc[a]))
                indeg[b] += 1
        for seq in self.chan_seq:
            for a, b in zip(seq, seq[1:]):
                adj[n + a].append((n + b, dur[n + a]))
                indeg[n + b] += 1

        est = [0] * total
        stack = [x for x in range(n) if indeg[x] == 0]
        level = self.level
        settled = 0
        while stack:
            x = stack.pop()
            settled += 1
            base = est[x]
            if x < n and base + dur[x] > level:
                return False
            for y, w in adj[x]:
                if base + w > est[y]:
                    est[y] = base + w
                if indeg[y] == 1:
                    indeg[y] = 0
                    stack.append(y)
                else:
                    indeg[y] -= 1
        if settled != count:
            return False  # ordering cycle
        self.est = est
        return self._consumer_floors_hold()

    def _consumer_floors_hold(self) -> bool:
        """Start-time floor for unplaced tasks whose producers are placed.

        Wherever such a task eventually lands, producers on other racks must
        ship over network channels, so its start is at least the earliest
        release plus the cross transfer work spread over all channels.  The
        floor is minimized over every rack the task could take.
        """
        est = self.est
        level = self.level
        channels = self.network.subchannel_count + 1
        top = min(self.network.rack_count, self.racks_used + 1)
        rack_of = self.rack_of
        for v in range(self.n):
            if rack_of[v] != 0 or self.tail[v] + est[v] > level:
                return rack_of[v] == 0  # placed tasks were checked during propagation
            ins = self.in_edges[v]
            if len(ins) < 2:
                continue
            placed = [(ei, self.edge_u[ei]) for ei in ins if rack_of[self.edge_u[ei]] != 0]
            if len(placed) < 2:
                continue
            best = None
            for r in range(1, top + 1):
                floor = est[v]
                cross_sum = 0
                min_rel = None
                for ei, u in placed:
                    rel = est[u] + self.proc[u]
                    if rack_of[u] == r:
                        arrival = rel + self.edge_delay[ei]
                    else:
                        q = self.net_min[ei]
                        arrival = rel + q
                        cross_sum += q
                        if min_rel is None or rel < min_rel:
                            min_rel = rel
                    if arrival > floor:
                        floor = arrival
                if min_rel is not None:
                    capacity = min_rel + -(-cross_sum // channels)
                    if capacity > floor:
                        floor = capacity
                if best is None or floor < best:
                    best = floor
                    if best == est[v]:
                        break
            if best is not None and best + self.tail[v] > level:
                return False
        return True

    # -- branching -----------------------------------------------------

    def run(self) -> Schedule | None:
        if self.n == 0:
            return Schedule()
        if not self._propagate():
            return None
        return self._place_task(0)

    def _rack_candidates(self, t: int) -> list[int]:
        """Used racks plus one fresh one, cheapest append-finish first.

        The candidate SET is fixed by the fresh-rack symmetry breaking; the
        ORDER is a greedy hint so feasible levels resolve quickly.  Ties go
        to the lower index, which keeps runs reproducible.
        """
        top = min(self.network.rack_count, self.racks_used + 1)
        est_t = self.est[t] if t < len(self.est) else 0

        def append_start(rack: int) -> int:
            seq = self.rack_seq[rack]
            if not seq:
                return est_t
            last = seq[-1]
            return max(est_t, self.est[last] + self.proc[last])

        racks = sorted(range(1, top + 1), key=lambda r: (append_start(r), r))
        if self.rng is not None:
            self.rng.shuffle(racks)
        return racks

    def _channel_candidates(self, ei: int) -> list[int]:
        """Wired plus used subchannels plus one fresh, earliest-free first."""
        top = min(self.network.subchannel_count, self.subch_used + 1)

        def free_at(channel: int) -> int:
            seq = self.chan_seq[channel]
            if not seq:
                return 0
            last = seq[-1]
            last_dur = (
                self.edge_wired[last] if channel == _WIRED else self.edge_wireless[last]
            )
            return self.est[self.n + last] + last_dur

        channels = sorted(
            range(_WIRED, _WIRED + top + 1), key=lambda c: (free_at(c), c)
        )
        if self.rng is not None:
            self.rng.shuffle(channels)
        return channels

    def _place_task(self, t: int) -> Schedule | None:
        if t == self.n:
            return self._extract()
        for rack in self._rack_candidates(t):
            fresh_rack = rack > self.racks_used
            if fresh_rack:
                self.racks_used += 1
            self.rack_of[t] = rack
            seq = self.rack_seq[rack]
            for pos in range(len(seq), -1, -1):  # append first
                self.budget.spend()
                seq.insert(pos, t)
                if self._propagate():
                    found = self._place_edge(t, 0)
                    if found is not None:
                        return found
                seq.pop(pos)
            self.rack_of[t] = 0
            if fresh_rack:
                self.racks_used -= 1
        return None

    def _final_stage_order(self, ei: int) -> tuple[int, int]:
        """Canonical key for the last task's transfers: producer finish, edge.

        While the last task's edges are being routed no further insertion
        can move an already-placed task, so producer finish times are final
        and an adjacent-exchange argument makes any same-channel order other
        than this one redundant.
        """
        u = self.edge_u[ei]
        return (self.est[u] + self.proc[u], ei)

    def _position_allowed(self, t: int, ei: int, seq: list[int], pos: int) -> bool:
        if t != self.n - 1:
            return True
        mine = set(self.in_edges[t])
        key = self._final_stage_order(ei)
        if pos > 0 and seq[pos - 1] in mine and self._final_stage_order(seq[pos - 1]) > key:
            return False
        if pos < len(seq) and seq[pos] in mine and self._final_stage_order(seq[pos]) < key:
            return False
        return True

    def _place_edge(self, t: int, j: int) -> Schedule | None:
        incoming = self.in_edges[t]
        if j == len(incoming):
            return self._place_task(t + 1)
        ei = incoming[j]
        if self.rack_of[self.edge_u[ei]] == self.rack_of[t]:
            self.budget.spend()
            self.chan_of[ei] = _LOCAL
            found = None
            if self._propagate():
                found = self._place_edge(t, j + 1)
            if found is None:
                self.chan_of[ei] = _UNROUTED
            return found
        for channel in self._channel_candidates(ei):
            fresh = channel > _WIRED and channel - _WIRED > self.subch_used
            if fresh:
                self.subch_used += 1
            self.chan_of[ei] = channel
            seq = self.chan_seq[channel]
            for pos in range(len(seq), -1, -1):  # append first
                if not self._position_allowed(t, ei, seq, pos):
                    continue
                self.budget.spend()
                seq.insert(pos, ei)
                if self._propagate():
                    found = self._place_edge(t, j + 1)
                    if found is not None:
                        return found
                seq.pop(pos)
            self.chan_of[ei] = _UNROUTED
            if fresh:
                self.subch_used -= 1
        return None

    def _extract(self) -> Schedule:
        est = self.est
        n = self.n
        task_slots = {
            self.order[t]: TaskSlot(self.rack_of[t], est[t]) for t in range(n)
        }
        edge_slots: dict[tuple[int, int], EdgeSlot] = {}
        for ei, e in enumerate(self.edges):
            channel = self.chan_of[ei]
            if channel == _LOCAL:
                start = est[self.edge_u[ei]] + self.proc[self.edge_u[ei]]
                edge_slots[e.key] = EdgeSlot(LOCAL, start)
            elif channel == _WIRED:
                edge_slots[e.key] = EdgeSlot(WIRED, est[n + ei])
            else:
                edge_slots[e.key] = EdgeSlot(wireless(channel - _WIRED), est[n + ei])
        return Schedule(task_slots, edge_slots)


def _require_valid(instance: ProblemInstance) -> None:
    problems = validate_job(instance.job)
    if problems:
        raise ValueError(f"invalid job: {problems[0]}")


def _lower_bound(instance: ProblemInstance) -> TimeUnits:
    """Longest branch reinforced by total work over the rack pool."""
    total = sum(t.processing_time for t in instance.job.tasks)
    energetic = -(-total // instance.network.rack_count)
    return max(longest_branch(instance.job, instance.network), energetic)


def solve_feasibility(
    instance: ProblemInstance,
    level: TimeUnits,
    cfg: SolverConfig = SolverConfig(),
) -> tuple[str, Schedule | None]:
    """Is there a schedule finishing by ``level``?  ("yes"/"no"/"unknown", schedule).

    Levels below the lower bound are refused as "no" without searching; the
    bound itself is the certificate.
    """
    _require_valid(instance)
    if level < _lower_bound(instance):
        return NO, None
    budget = _Budget(cfg.node_limit, cfg.time_limit)
    rng = random.Random(cfg.deterministic_seed) if cfg.deterministic_seed is not None else None
    search = _FeasibilitySearch(instance, level, budget, rng)
    try:
        found = search.run()
    except _Exhausted:
        return UNKNOWN, None
    return (YES, found) if found is not None else (NO, None)


def solve_exact(
    instance: ProblemInstance, cfg: SolverConfig = SolverConfig()
) -> SolverResult:
    """Minimum makespan by bisection over [lower bound, single-rack time]."""
    _require_valid(instance)
    job = instance.job
    lo = _lower_bound(instance)
    incumbent = single_rack_schedule(instance)
    hi = min(upper_bound(job), makespan(incumbent, job))  # achieved single-rack time
    listed = list_schedule(instance)
    if makespan(listed, job) < hi:  # a better greedy incumbent shrinks the interval
        incumbent, hi = listed, makespan(listed, job)

    budget = _Budget(cfg.node_limit, cfg.time_limit)
    rng = random.Random(cfg.deterministic_seed) if cfg.deterministic_seed is not None else None
    iterations = 0
    while lo < hi:
        mid = (lo + hi) // 2
        search = _FeasibilitySearch(instance, mid, budget, rng)
        try:
            found = search.run()
        except _Exhausted:
            return SolverResult(FEASIBLE, incumbent, hi, (lo, hi), budget.spent, iterations)
        iterations += 1
        if found is not None:
            incumbent = found
            hi = makespan(found, job)
        else:
            lo = mid + 1
    return SolverResult(OPTIMAL, incumbent, hi, (lo, hi), budget.spent, iterations)


def solve_wired_only(
    instance: ProblemInstance, cfg: SolverConfig = SolverConfig()
) -> SolverResult:
    """Exact optimum with wireless subchannels removed."""
    wired_net = replace(instance.network, subchannel_count=0)
    return solve_exact(ProblemInstance(instance.job, wired_net), cfg)
