"""Big-M linearization of the joint placement/transfer scheduling problem.

The model mirrors the disjunctive reformulation: binary placement variables
are paired with timed auxiliaries that carry the start times, indicator
variables make same-resource pairs explicit, and every either-or resource
constraint becomes a pair of big-M inequalities.  The makespan variable is
boxed by the lower/upper bounds and dominated by every task's finish time.

Variables (all binaries in [0,1], timed auxiliaries in [0, big-M]):

  x_v_i     task v runs on rack i          xt_v_i    its start, 0 if unused
  y_u_v_t   edge (u,v) uses channel t      yt_u_v_t  transfer start, 0 if
            (t = b wired, c local, wk                 unused
            subchannel k)
  psi_v_w_i tasks v,w share rack i         sig_v_w   v starts no later
  chi_..._t edges compete on channel t     phi_...   first edge starts no
                                                     later
  Cmax      the makespan

Two repairs are baked in and covered by tests: the start-ordering
inequalities for channel pairs are relaxed unless the pair actually
competes on that channel family (otherwise the zero start times of the
unused family force contradictory orderings), and transfer durations enter
the ordering constraints multiplied by their channel indicator so that an
edge routed elsewhere cannot poison a pair constraint when its would-be
duration exceeds the big-M.
"""

from __future__ import annotations

import itertools
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .bounds import BoundPair
from .model import (
    LOCAL,
    WIRED,
    Channel,
    EdgeSlot,
    ProblemInstance,
    Schedule,
    TaskSlot,
    TimeUnits,
    makespan,
    transfer_durations,
    validate_job,
    wireless,
)

BINARY = "binary"
CONTINUOUS = "continuous"

LE = "<="
GE = ">="
EQ = "=="

Number = Fraction


def _frac(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class EncoderConfig:
    epsilon: Fraction = Fraction(1, 10)
    big_m: TimeUnits | None = None  # None: use the job's upper bound

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", _frac(self.epsilon))
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie strictly between 0 and 1")
        if self.big_m is not None and self.big_m < 0:
            raise ValueError("big_m must be non-negative")


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lower: Fraction
    upper: Fraction


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[Fraction, str], ...]
    sense: str
    rhs: Fraction


@dataclass(frozen=True)
class LinearModel:
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[Fraction, str], ...] | None = None

    def __post_init__(self) -> None:
        declared = {v.name for v in self.variables}
        if len(declared) != len(self.variables):
            raise ValueError("duplicate variable declaration")
        for c in self.constraints:
            for _, name in c.terms:
                if name not in declared:
                    raise ValueError(f"constraint {c.name} references undeclared {name}")
        if self.objective:
            for _, name in self.objective:
                if name not in declared:
                    raise ValueError(f"objective references undeclared {name}")


ModelStats = namedtuple("ModelStats", "n_binary n_continuous n_constraints")


def model_stats(model: LinearModel) -> ModelStats:
    n_bin = sum(1 for v in model.variables if v.kind == BINARY)
    return ModelStats(n_bin, len(model.variables) - n_bin, len(model.constraints))


# ---------------------------------------------------------------------------
# naming


class _Names:
    """Variable names and index sets for one instance."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.tasks = instance.job.task_ids()
        self.racks = list(range(1, instance.network.rack_count + 1))
        self.edges = sorted(instance.job.edges, key=lambda e: e.key)
        k = instance.network.subchannel_count
        self.channels: list[Channel] = [WIRED, LOCAL] + [wireless(i) for i in range(1, k + 1)]
        self.contended: list[Channel] = [WIRED] + [wireless(i) for i in range(1, k + 1)]
        self.wireless_only: list[Channel] = [wireless(i) for i in range(1, k + 1)]

    @staticmethod
    def tag(channel: Channel) -> str:
        if channel.is_wired:
            return "b"
        if channel.is_local:
            return "c"
        return f"w{channel.subchannel}"

    def x(self, v: int, i: int) -> str:
        return f"x_{v}_{i}"

    def xt(self, v: int, i: int) -> str:
        return f"xt_{v}_{i}"

    def y(self, key: tuple[int, int], channel: Channel) -> str:
        return f"y_{key[0]}_{key[1]}_{self.tag(channel)}"

    def yt(self, key: tuple[int, int], channel: Channel) -> str:
        return f"yt_{key[0]}_{key[1]}_{self.tag(channel)}"

    def psi(self, v: int, w: int, i: int) -> str:
        return f"psi_{v}_{w}_{i}"

    def sig(self, v: int, w: int) -> str:
        return f"sig_{v}_{w}"

    def chi(self, e: tuple[int, int], f: tuple[int, int], channel: Channel) -> str:
        return f"chi_{e[0]}_{e[1]}_{f[0]}_{f[1]}_{self.tag(channel)}"

    def phi(self, e: tuple[int, int], f: tuple[int, int]) -> str:
        return f"phi_{e[0]}_{e[1]}_{f[0]}_{f[1]}"

    def task_pairs(self) -> Iterator[tuple[int, int]]:
        return itertools.permutations(self.tasks, 2)

    def edge_pairs(self) -> Iterator[tuple[tuple[int, int], tuple[int, int]]]:
        keys = [e.key for e in self.edges]
        return itertools.permutations(keys, 2)


# ---------------------------------------------------------------------------
# model construction


def _build(
    instance: ProblemInstance,
    bounds: BoundPair,
    cfg: EncoderConfig,
    level: TimeUnits | None,
) -> LinearModel:
    problems = validate_job(instance.job)
    if problems:
        raise ValueError(f"invalid job: {problems[0]}")
    job, network = instance.job, instance.network
    if network.rack_count < 1:
        raise ValueError("network needs at least one rack")
    if bounds.upper < max((t.processing_time for t in job.tasks), default=0):
        raise ValueError("upper bound is below a single task's processing time")

    names = _Names(instance)
    big_m = Fraction(bounds.upper if cfg.big_m is None else cfg.big_m)
    eps = cfg.epsilon
    one = Fraction(1)
    cap = Fraction(level if level is not None else bounds.upper)

    variables: list[Variable] = []
    for v in names.tasks:
        for i in names.racks:
            variables.append(Variable(names.x(v, i), BINARY, Fraction(0), one))
    for v in names.tasks:
        for i in names.racks:
            variables.append(Variable(names.xt(v, i), CONTINUOUS, Fraction(0), big_m))
    for e in names.edges:
        for c in names.channels:
            variables.append(Variable(names.y(e.key, c), BINARY, Fraction(0), one))
    for e in names.edges:
        for c in names.channels:
            variables.append(Variable(names.yt(e.key, c), CONTINUOUS, Fraction(0), big_m))
    for v, w in names.task_pairs():
        for i in names.racks:
            variables.append(Variable(names.psi(v, w, i), BINARY, Fraction(0), one))
    for v, w in names.task_pairs():
        variables.append(Variable(names.sig(v, w), BINARY, Fraction(0), one))
    for e, f in names.edge_pairs():
        for c in names.contended:
            variables.append(Variable(names.chi(e, f, c), BINARY, Fraction(0), one))
    for e, f in names.edge_pairs():
        variables.append(Variable(names.phi(e, f), BINARY, Fraction(0), one))
    variables.append(Variable("Cmax", CONTINUOUS, Fraction(bounds.lower), cap))

    cons: list[Constraint] = []

    def add(name: str, terms: Iterable[tuple], sense: str, rhs) -> None:
        clean = tuple((_frac(c), var) for c, var in terms if c != 0)
        cons.append(Constraint(name, clean, sense, _frac(rhs)))

    proc = {v: job.processing(v) for v in names.tasks}
    durations = {e.key: transfer_durations(e, network) for e in names.edges}
    delay = {e.key: e.local_delay for e in names.edges}

    # each task runs exactly once; each edge takes exactly one channel
    for v in names.tasks:
        add(f"assign_{v}", [(1, names.x(v, i)) for i in names.racks], EQ, 1)
    for e in names.edges:
        add(
            f"cover_{e.key[0]}_{e.key[1]}",
            [(1, names.y(e.key, c)) for c in names.channels],
            EQ,
            1,
        )

    # timed auxiliaries track their binaries: big-M link plus the zero link
    # that pins the auxiliary to 0 on unused rows
    for v in names.tasks:
        for i in names.racks:
            add(
                f"link_x_{v}_{i}",
                [(1, names.xt(v, i)), (-(big_m + eps), names.x(v, i))],
                LE,
                1 - eps,
            )
            add(f"zero_x_{v}_{i}", [(1, names.xt(v, i)), (-big_m, names.x(v, i))], LE, 0)
    for e in names.edges:
        for c in names.channels:
            add(
                f"link_y_{e.key[0]}_{e.key[1]}_{names.tag(c)}",
                [(1, names.yt(e.key, c)), (-(big_m + eps), names.y(e.key, c))],
                LE,
                1 - eps,
            )
            add(
                f"zero_y_{e.key[0]}_{e.key[1]}_{names.tag(c)}",
                [(1, names.yt(e.key, c)), (-big_m, names.y(e.key, c))],
                LE,
                0,
            )

    # indicator construction
    for v, w in names.task_pairs():
        add(f"psi_card_{v}_{w}", [(1, names.psi(v, w, i)) for i in names.racks], LE, 1)
        for i in names.racks:
            pair = [(1, names.x(v, i)), (1, names.x(w, i))]
            add(f"psi_lo_{v}_{w}_{i}", pair + [(-2, names.psi(v, w, i))], GE, 0)
            add(f"psi_hi_{v}_{w}_{i}", pair + [(-2, names.psi(v, w, i))], LE, 1)
    for e, f in names.edge_pairs():
        tag = f"{e[0]}_{e[1]}_{f[0]}_{f[1]}"
        add(f"chi_card_{tag}", [(1, names.chi(e, f, c)) for c in names.contended], LE, 1)
        for c in names.contended:
            pair = [(1, names.y(e, c)), (1, names.y(f, c))]
            add(f"chi_lo_{tag}_{names.tag(c)}", pair + [(-2, names.chi(e, f, c))], GE, 0)
            add(f"chi_hi_{tag}_{names.tag(c)}", pair + [(-2, names.chi(e, f, c))], LE, 1)

    # rack exclusivity: order the pair, then require a full processing gap
    # when both tasks share a rack
    for v, w in names.task_pairs():
        start_v = [(1, names.xt(v, i)) for i in names.racks]
        start_w = [(1, names.xt(w, i)) for i in names.racks]
        add(
            f"rack_order_{v}_{w}",
            start_w + [(-1, n) for _, n in start_v] + [(-(big_m + eps), names.sig(v, w))],
            LE,
            -eps,
        )
        add(
            f"rack_gap_{v}_{w}",
            start_v
            + [(-1, n) for _, n in start_w]
            + [(big_m, names.sig(v, w))]
            + [(big_m, names.psi(v, w, i)) for i in names.racks],
            LE,
            2 * big_m - proc[v],
        )
    for v, w in itertools.combinations(names.tasks, 2):
        add(
            f"sig_total_{v}_{w}",
            [(1, names.sig(v, w)), (1, names.sig(w, v))]
            + [(-1, names.psi(v, w, i)) for i in names.racks],
            GE,
            0,
        )

    # channel exclusivity; the ordering rows are slack unless the pair
    # competes on that channel family
    for e, f in names.edge_pairs():
        tag = f"{e[0]}_{e[1]}_{f[0]}_{f[1]}"
        q_e = durations[e][0]
        add(
            f"wired_order_{tag}",
            [
                (1, names.yt(f, WIRED)),
                (-1, names.yt(e, WIRED)),
                (-(big_m + eps), names.phi(e, f)),
                (big_m, names.chi(e, f, WIRED)),
            ],
            LE,
            big_m - eps,
        )
        add(
            f"wired_gap_{tag}",
            [
                (1, names.yt(e, WIRED)),
                (q_e, names.y(e, WIRED)),
                (-1, names.yt(f, WIRED)),
                (big_m, names.phi(e, f)),
                (big_m, names.chi(e, f, WIRED)),
            ],
            LE,
            2 * big_m,
        )
        if names.wireless_only:
            qw_e = durations[e][1]
            sum_f = [(1, names.yt(f, c)) for c in names.wireless_only]
            sum_e = [(-1, names.yt(e, c)) for c in names.wireless_only]
            chis = [(big_m, names.chi(e, f, c)) for c in names.wireless_only]
            add(
                f"wifi_order_{tag}",
                sum_f + sum_e + [(-(big_m + eps), names.phi(e, f))] + chis,
                LE,
                big_m - eps,
            )
            add(
                f"wifi_gap_{tag}",
                [(1, names.yt(e, c)) for c in names.wireless_only]
                + [(qw_e, names.y(e, c)) for c in names.wireless_only]
                + [(-1, names.yt(f, c)) for c in names.wireless_only]
                + [(big_m, names.phi(e, f))]
                + chis,
                LE,
                2 * big_m,
            )

    # a transfer starts after its producer finishes and delivers before its
    # consumer starts, with the duration picked by the channel choice
    for e in names.edges:
        u, v = e.key
        tag = f"{u}_{v}"
        add(
            f"release_{tag}",
            [(1, names.xt(u, i)) for i in names.racks]
            + [(-1, names.yt(e.key, c)) for c in names.channels],
            LE,
            -proc[u],
        )
        q_e, qw_e = durations[e.key]
        duration_terms = [(q_e, names.y(e.key, WIRED)), (delay[e.key], names.y(e.key, LOCAL))]
        duration_terms += [(qw_e, names.y(e.key, c)) for c in names.wireless_only]
        add(
            f"delivery_{tag}",
            [(1, names.yt(e.key, c)) for c in names.channels]
            + duration_terms
            + [(-1, names.xt(v, i)) for i in names.racks],
            LE,
            0,
        )
        add(
            f"couple_{tag}",
            [(1, names.psi(u, v, i)) for i in names.racks] + [(-1, names.y(e.key, LOCAL))],
            EQ,
            0,
        )

    # the makespan dominates every finish time
    for v in names.tasks:
        add(
            f"finish_{v}",
            [(1, names.xt(v, i)) for i in names.racks] + [(-1, "Cmax")],
            LE,
            -proc[v],
        )

    objective = ((Fraction(1), "Cmax"),) if level is None else None
    return LinearModel(tuple(variables), tuple(cons), objective)


def build_rp(
    instance: ProblemInstance, bounds: BoundPair, cfg: EncoderConfig = EncoderConfig()
) -> LinearModel:
    """Minimize the makespan subject to the full linearized constraint set."""
    return _build(instance, bounds, cfg, level=None)


def build_fp(
    instance: ProblemInstance,
    bounds: BoundPair,
    level: TimeUnits,
    cfg: EncoderConfig = EncoderConfig(),
) -> LinearModel:
    """Feasibility variant: no objective, makespan capped at ``level``.

    The big-M stays at the original upper bound; only the cap moves.
    """
    if not bounds.lower <= level <= bounds.upper:
        raise ValueError(
            f"level {level} outside the bound interval [{bounds.lower}, {bounds.upper}]"
        )
    return _build(instance, bounds, cfg, level=level)


# ---------------------------------------------------------------------------
# LP text


def _render_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{float(value):.6f}"


def _render_terms(terms: Sequence[tuple[Fraction, str]]) -> str:
    if not terms:
        return ""
    parts: list[str] = []
    for idx, (coef, name) in enumerate(terms):
        mag = abs(coef)
        body = name if mag == 1 else f"{_render_number(mag)} {name}"
        if idx == 0:
            parts.append(body if coef >= 0 else f"- {body}")
        else:
            parts.append(f"+ {body}" if coef >= 0 else f"- {body}")
    return " ".join(parts)


_SENSE = {LE: "<=", GE: ">=", EQ: "="}


def write_lp(model: LinearModel) -> str:
    """Deterministic LP-format text: objective, constraints, bounds, binaries."""
    lines = ["\\ hybridsched linear model"]
    lines.append("Minimize")
    lines.append(f" obj: {_render_terms(model.objective or ())}".rstrip())
    lines.append("Subject To")
    for c in model.constraints:
        lines.append(f" {c.name}: {_render_terms(c.terms)} {_SENSE[c.sense]} {_render_number(c.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        if v.kind == CONTINUOUS:
            lines.append(f" {_render_number(v.lower)} <= {v.name} <= {_render_number(v.upper)}")
    lines.append("Binaries")
    for v in model.variables:
        if v.kind == BINARY:
            lines.append(f" {v.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# evaluation, translation, enumeration


def violated_constraints(model: LinearModel, values: Mapping[str, int | Fraction]) -> list[str]:
    """Names of constraints the assignment breaks (exact arithmetic)."""
    bad = []
    for c in model.constraints:
        lhs = sum((coef * Fraction(values[name]) for coef, name in c.terms), Fraction(0))
        if c.sense == LE and lhs > c.rhs:
            bad.append(c.name)
        elif c.sense == GE and lhs < c.rhs:
            bad.append(c.name)
        elif c.sense == EQ and lhs != c.rhs:
            bad.append(c.name)
    return bad


def satisfies(model: LinearModel, values: Mapping[str, int | Fraction]) -> bool:
    for v in model.variables:
        val = Fraction(values[v.name])
        if not v.lower <= val <= v.upper:
            return False
    return not violated_constraints(model, values)


def encode_schedule(
    instance: ProblemInstance, schedule: Schedule, bounds: BoundPair
) -> dict[str, int]:
    """Translate a schedule into a full variable assignment for the model."""
    names = _Names(instance)
    values: dict[str, int] = {}
    for v in names.tasks:
        slot = schedule.task_slots[v]
        for i in names.racks:
            values[names.x(v, i)] = 1 if slot.rack == i else 0
            values[names.xt(v, i)] = slot.start if slot.rack == i else 0
    for e in names.edges:
        slot = schedule.edge_slots[e.key]
        for c in names.channels:
            chosen = slot.channel == c
            values[names.y(e.key, c)] = 1 if chosen else 0
            values[names.yt(e.key, c)] = slot.start if chosen else 0
    for v, w in names.task_pairs():
        sv, sw = schedule.task_slots[v], schedule.task_slots[w]
        for i in names.racks:
            values[names.psi(v, w, i)] = 1 if sv.rack == i and sw.rack == i else 0
        values[names.sig(v, w)] = 1 if sv.start <= sw.start else 0
    for e, f in names.edge_pairs():
        se, sf = schedule.edge_slots[e], schedule.edge_slots[f]
        for c in names.contended:
            values[names.chi(e, f, c)] = 1 if se.channel == c and sf.channel == c else 0
        values[names.phi(e, f)] = 1 if se.start <= sf.start else 0
    values["Cmax"] = max(makespan(schedule, instance.job), bounds.lower)
    return values


def decode_assignment(
    instance: ProblemInstance, values: Mapping[str, int | Fraction]
) -> Schedule:
    """Read a schedule back out of a satisfying assignment."""
    names = _Names(instance)
    task_slots: dict[int, TaskSlot] = {}
    for v in names.tasks:
        racks = [i for i in names.racks if Fraction(values[names.x(v, i)]) == 1]
        if len(racks) != 1:
            raise ValueError(f"task {v} is not assigned to exactly one rack")
        start = sum(Fraction(values[names.xt(v, i)]) for i in names.racks)
        task_slots[v] = TaskSlot(racks[0], _as_int(start, f"start of task {v}"))
    edge_slots: dict[tuple[int, int], EdgeSlot] = {}
    for e in names.edges:
        chosen = [c for c in names.channels if Fraction(values[names.y(e.key, c)]) == 1]
        if len(chosen) != 1:
            raise ValueError(f"edge {e.key} is not routed on exactly one channel")
        start = sum(Fraction(values[names.yt(e.key, c)]) for c in names.channels)
        edge_slots[e.key] = EdgeSlot(chosen[0], _as_int(start, f"start of edge {e.key}"))
    return Schedule(task_slots, edge_slots)


def _as_int(value: Fraction, what: str) -> int:
    if value.denominator != 1:
        raise ValueError(f"{what} is not integral: {value}")
    return value.numerator


def enumeration_order(instance: ProblemInstance) -> list[str]:
    """Variable order that lets the grid enumerator prune early: each task's
    placement immediately precedes its pair indicators, edges follow once
    both endpoints are placed."""
    names = _Names(instance)
    order: list[str] = []
    placed: list[int] = []
    edges_done: list[tuple[int, int]] = []
    for v in names.tasks:
        for i in names.racks:
            order.append(names.x(v, i))
        for i in names.racks:
            order.append(names.xt(v, i))
        for w in placed:
            order.append(names.sig(v, w))
            order.append(names.sig(w, v))
            for i in names.racks:
                order.append(names.psi(v, w, i))
                order.append(names.psi(w, v, i))
        placed.append(v)
        here = {p for p in placed}
        for e in names.edges:
            if e.key in edges_done or e.producer not in here or e.consumer not in here:
                continue
            for c in names.channels:
                order.append(names.y(e.key, c))
            for c in names.channels:
                order.append(names.yt(e.key, c))
            for f in edges_done:
                order.append(names.phi(e.key, f))
                order.append(names.phi(f, e.key))
                for c in names.contended:
                    order.append(names.chi(e.key, f, c))
                    order.append(names.chi(f, e.key, c))
            edges_done.append(e.key)
    order.append("Cmax")
    return order


def enumerate_feasible_assignments(
    model: LinearModel, order: Sequence[str] | None = None
) -> Iterator[dict[str, int]]:
    """Depth-first sweep of the integer grid inside the variable bounds,
    yielding every assignment that satisfies all constraints.

    Continuous variables are sampled at integer points, which is exactly the
    resolution schedules live at.  Constraints are checked as soon as their
    last variable (in ``order``) is assigned, with rational coefficients
    pre-scaled to integers.  Intended for toy instances only: the grid grows
    with the big-M.
    """
    by_name = {v.name: v for v in model.variables}
    if order is None:
        names = [v.name for v in model.variables]
    else:
        names = list(order)
        if set(names) != set(by_name):
            raise ValueError("order must cover exactly the model's variables")

    position = {name: idx for idx, name in enumerate(names)}

    def lcm(a: int, b: int) -> int:
        from math import gcd

        return a // gcd(a, b) * b

    # (terms [(int coef, slot)], sense, int rhs), indexed by the slot at
    # which all their variables are known
    ready_at: list[list[tuple[list[tuple[int, int]], str, int]]] = [[] for _ in names]
    for c in model.constraints:
        if not c.terms:
            continue
        scale = c.rhs.denominator
        for coef, _ in c.terms:
            scale = lcm(scale, coef.denominator)
        terms = [(int(coef * scale), position[name]) for coef, name in c.terms]
        last = max(slot for _, slot in terms)
        ready_at[last].append((terms, c.sense, int(c.rhs * scale)))

    domains: list[range] = []
    for name in names:
        v = by_name[name]
        lo = -(-v.lower.numerator // v.lower.denominator)  # ceil
        hi = v.upper.numerator // v.upper.denominator  # floor
        domains.append(range(lo, hi + 1))

    vals = [0] * len(names)
    total = len(names)

    def walk(idx: int) -> Iterator[dict[str, int]]:
        if idx == total:
            yield {name: vals[slot] for name, slot in position.items()}
            return
        checks = ready_at[idx]
        for val in domains[idx]:
            vals[idx] = val
            ok = True
            for terms, sense, rhs in checks:
                lhs = 0
                for coef, slot in terms:
                    lhs += coef * vals[slot]
                if (
                    (sense == LE and lhs > rhs)
                    or (sense == GE and lhs < rhs)
                    or (sense == EQ and lhs != rhs)
                ):
                    ok = False
                    break
            if ok:
                yield from walk(idx + 1)

    if total == 0:
        yield {}
        return
    yield from walk(0)
