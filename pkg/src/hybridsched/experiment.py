"""Batch sweeps over racks, subchannels and the network factor.

A sweep is a grid of cells (racks x subchannels x network factor).  For
every cell, ``instances`` jobs are drawn; the job for (factor, index) is
derived from the master seed only, so the same job is re-solved across all
rack/subchannel cells and per-instance gains are paired comparisons.

Gains compare the exact scheduler at K subchannels against the same jobs at
K = 0: gain = (wired_only_makespan - makespan_K) / wired_only_makespan,
averaged per cell.
"""

from __future__ import annotations

import csv
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import baselines
from .generator import GenConfig, gen_onestage_mapreduce, gen_random_dag, gen_simple_mapreduce
from .model import JobGraph, NetworkConfig, ProblemInstance, makespan
from .solver import FEASIBLE, OPTIMAL, SolverConfig, solve_exact, solve_wired_only

FAMILIES = ("simple", "onestage", "random")
SCHEDULERS = ("exact", "wired-only", "list", "random", "single-rack")

CSV_COLUMNS = (
    "instance",
    "family",
    "n_tasks",
    "racks",
    "subchannels",
    "network_factor",
    "scheduler",
    "makespan",
    "status",
    "solve_time",
    "nodes",
)


@dataclass(frozen=True)
class ExperimentSpec:
    family: str
    tasks: tuple[int, int]
    racks: tuple[int, ...] | str          # explicit rack counts, or "tasks"
    subchannels: tuple[int, ...]
    network_factors: tuple[float, ...]
    instances: int
    seed: int
    schedulers: tuple[str, ...] = ("exact",)
    edge_prob: float = 0.3
    node_limit: int | None = 10_000_000
    time_limit: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; pick one of {FAMILIES}")
        if self.instances < 1:
            raise ValueError("need at least one instance per cell")
        if isinstance(self.racks, str) and self.racks != "tasks":
            raise ValueError('racks must be a list of counts or the string "tasks"')
        if not isinstance(self.racks, str) and not self.racks:
            raise ValueError("rack sweep must be non-empty")
        if not self.subchannels or not self.network_factors:
            raise ValueError("sweeps must be non-empty")
        for s in self.schedulers:
            if s not in SCHEDULERS:
                raise ValueError(f"unknown scheduler {s!r}; pick from {SCHEDULERS}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        racks = data["racks"]
        return cls(
            family=data["family"],
            tasks=tuple(data["tasks"]),
            racks=racks if isinstance(racks, str) else tuple(racks),
            subchannels=tuple(data["subchannels"]),
            network_factors=tuple(data["network_factors"]),
            instances=int(data["instances"]),
            seed=int(data["seed"]),
            schedulers=tuple(data.get("schedulers", ("exact",))),
            edge_prob=float(data.get("edge_prob", 0.3)),
            node_limit=data.get("node_limit", 10_000_000),
            time_limit=data.get("time_limit"),
        )


@dataclass(frozen=True)
class ResultRow:
    instance: str
    family: str
    n_tasks: int
    racks: int
    subchannels: int
    network_factor: float
    scheduler: str
    makespan: int | None
    status: str
    solve_time: float
    nodes: int


@dataclass(frozen=True)
class SummaryRow:
    racks: int
    subchannels: int
    network_factor: float
    scheduler: str
    solved: int
    mean_makespan: float
    mean_gain_vs_wired: float | None  # exact scheduler with K > 0 only


def _instance_seed(master: int, factor_index: int, instance_index: int) -> int:
    # explicit arithmetic: never rely on hash() for reproducibility
    return (master * 1_000_003 + factor_index) * 1_000_003 + instance_index


def _draw_job(spec: ExperimentSpec, factor: float, factor_index: int, idx: int) -> JobGraph:
    seed = _instance_seed(spec.seed, factor_index, idx)
    rng = random.Random(seed)
    n = rng.randint(spec.tasks[0], spec.tasks[1])
    cfg = GenConfig(seed=rng.randrange(2**31), network_factor=factor)
    if spec.family == "simple":
        inst = gen_simple_mapreduce(max(1, n - 1), cfg)
    elif spec.family == "onestage":
        n_map = max(1, -(-n // 2))
        inst = gen_onestage_mapreduce(n_map, max(1, n - n_map), cfg)
    else:
        inst = gen_random_dag(n, spec.edge_prob, cfg)
    return inst.job


def _run_scheduler(
    name: str, instance: ProblemInstance, cfg: SolverConfig, seed: int
) -> tuple[int | None, str, int]:
    if name == "exact":
        res = solve_exact(instance, cfg)
        return res.makespan, res.status, res.nodes_explored
    if name == "wired-only":
        res = solve_wired_only(instance, cfg)
        return res.makespan, res.status, res.nodes_explored
    if name == "list":
        sched = baselines.list_schedule(instance)
    elif name == "random":
        sched = baselines.random_schedule(instance, seed)
    elif name == "single-rack":
        sched = baselines.single_rack_schedule(instance)
    else:
        raise ValueError(f"unknown scheduler {name!r}")
    return makespan(sched, instance.job), FEASIBLE, 0


def run_experiment(spec: ExperimentSpec) -> tuple[list[ResultRow], list[SummaryRow]]:
    solver_cfg = SolverConfig(node_limit=spec.node_limit, time_limit=spec.time_limit)
    rows: list[ResultRow] = []
    # (racks, subchannels, factor, scheduler, idx) -> makespan
    mk: dict[tuple, int | None] = {}

    for fi, factor in enumerate(spec.network_factors):
        jobs = [_draw_job(spec, factor, fi, idx) for idx in range(spec.instances)]
        for idx, job in enumerate(jobs):
            n = len(job.tasks)
            rack_values = [n] if spec.racks == "tasks" else list(spec.racks)
            for racks in rack_values:
                for k in spec.subchannels:
                    network = NetworkConfig(rack_count=racks, subchannel_count=k)
                    instance = ProblemInstance(job, network)
                    for scheduler in spec.schedulers:
                        seed = _instance_seed(spec.seed, fi, idx) ^ 0x5EED
                        t0 = time.perf_counter()
                        result_mk, status, nodes = _run_scheduler(
                            scheduler, instance, solver_cfg, seed
                        )
                        elapsed = time.perf_counter() - t0
                        rows.append(
                            ResultRow(
                                instance=f"{spec.family}-f{factor}-i{idx}",
                                family=spec.family,
                                n_tasks=n,
                                racks=racks,
                                subchannels=k,
                                network_factor=factor,
                                scheduler=scheduler,
                                makespan=result_mk,
                                status=status,
                                solve_time=elapsed,
                                nodes=nodes,
                            )
                        )
                        mk[(racks, k, factor, scheduler, idx)] = result_mk
    summary = _summarize(spec, rows, mk)
    return rows, summary


def _summarize(
    spec: ExperimentSpec, rows: Iterable[ResultRow], mk: dict
) -> list[SummaryRow]:
    cells: dict[tuple, list[int]] = {}
    for row in rows:
        if row.makespan is not None:
            key = (row.racks, row.subchannels, row.network_factor, row.scheduler)
            cells.setdefault(key, []).append(row.makespan)

    out: list[SummaryRow] = []
    for key in sorted(cells):
        racks, k, factor, scheduler = key
        values = cells[key]
        gain = None
        if scheduler == "exact" and k > 0:
            paired = []
            for idx in range(spec.instances):
                base = mk.get((racks, 0, factor, "exact", idx))
                this = mk.get((racks, k, factor, "exact", idx))
                if base is not None and base > 0 and this is not None:
                    paired.append((base - this) / base)
            if paired:
                gain = sum(paired) / len(paired)
        out.append(
            SummaryRow(
                racks=racks,
                subchannels=k,
                network_factor=factor,
                scheduler=scheduler,
                solved=len(values),
                mean_makespan=sum(values) / len(values),
                mean_gain_vs_wired=gain,
            )
        )
    return out


def mean_gain(summary: Iterable[SummaryRow], racks: int, subchannels: int, factor: float) -> float:
    """Convenience lookup of the exact scheduler's mean gain in one cell."""
    for row in summary:
        if (
            row.racks == racks
            and row.subchannels == subchannels
            and row.network_factor == factor
            and row.scheduler == "exact"
        ):
            if row.mean_gain_vs_wired is None:
                raise ValueError("cell has no gain (K = 0 or missing baseline cell)")
            return row.mean_gain_vs_wired
    raise KeyError(f"no summary cell for racks={racks} K={subchannels} factor={factor}")


def write_rows_csv(rows: Iterable[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.instance,
                    row.family,
                    row.n_tasks,
                    row.racks,
                    row.subchannels,
                    row.network_factor,
                    row.scheduler,
                    "" if row.makespan is None else row.makespan,
                    row.status,
                    f"{row.solve_time:.6f}",
                    row.nodes,
                ]
            )


def format_summary(summary: Iterable[SummaryRow]) -> str:
    lines = ["racks  K  factor  scheduler     solved  mean_makespan  mean_gain"]
    for row in summary:
        gain = "" if row.mean_gain_vs_wired is None else f"{row.mean_gain_vs_wired:8.4f}"
        lines.append(
            f"{row.racks:5d}  {row.subchannels:1d}  {row.network_factor:6.2f}  "
            f"{row.scheduler:12s}  {row.solved:6d}  {row.mean_makespan:13.2f}  {gain}"
        )
    return "\n".join(lines)
