"""Seeded workload generators for the three benchmark job families.

Processing times are drawn uniformly from ``processing_range``.  Transfer
times are controlled by the network factor: the ratio between the average
data transfer time and the average processing time.  Each edge draws a
wired transfer time q uniformly from [1, round(2 * factor * mean(p))] and
converts it to a data size d with d / wired_bandwidth = q, so the ratio of
means converges to the factor.  With the default 10 Gbps links (both wired
and wireless, so q equals the wireless time too) the conversion is exact.

Local-transfer delays are 0 throughout: the families model cross-rack data
movement, and co-located data is simply on disk already.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import (
    TIME_UNITS_PER_SECOND,
    DataEdge,
    JobGraph,
    NetworkConfig,
    ProblemInstance,
    Task,
)


@dataclass(frozen=True)
class GenConfig:
    seed: int
    network_factor: float = 0.5
    processing_range: tuple[int, int] = (1, 100)
    racks: int = 4
    subchannels: int = 1
    wired_bandwidth: int = 10_000
    wireless_bandwidth: int = 10_000

    def __post_init__(self) -> None:
        if self.network_factor <= 0:
            raise ValueError("network_factor must be positive")
        lo, hi = self.processing_range
        if lo < 1 or hi < lo:
            raise ValueError("processing_range must be a non-empty positive interval")


def _network(cfg: GenConfig) -> NetworkConfig:
    return NetworkConfig(
        rack_count=cfg.racks,
        subchannel_count=cfg.subchannels,
        wired_bandwidth=cfg.wired_bandwidth,
        wireless_bandwidth=cfg.wireless_bandwidth,
    )


def max_transfer_time(cfg: GenConfig) -> int:
    """Upper end of the per-edge wired transfer time distribution."""
    lo, hi = cfg.processing_range
    return max(1, round(2 * cfg.network_factor * (lo + hi) / 2))


def _draw_edge(rng: random.Random, u: int, v: int, cfg: GenConfig) -> DataEdge:
    q = rng.randint(1, max_transfer_time(cfg))
    # smallest data size whose wired transfer takes at least q units
    data = -(-q * cfg.wired_bandwidth // TIME_UNITS_PER_SECOND)
    return DataEdge(u, v, data, 0)


def gen_simple_mapreduce(n_map: int, cfg: GenConfig) -> ProblemInstance:
    """n_map map tasks all feeding a single reduce task."""
    if n_map < 1:
        raise ValueError("need at least one map task")
    rng = random.Random(cfg.seed)
    lo, hi = cfg.processing_range
    tasks = tuple(Task(i, rng.randint(lo, hi)) for i in range(n_map + 1))
    reduce_id = n_map
    edges = tuple(_draw_edge(rng, i, reduce_id, cfg) for i in range(n_map))
    return ProblemInstance(JobGraph(tasks, edges), _network(cfg))


def gen_onestage_mapreduce(n_map: int, n_reduce: int, cfg: GenConfig) -> ProblemInstance:
    """Complete bipartite map-to-reduce stage."""
    if n_map < 1 or n_reduce < 1:
        raise ValueError("need at least one map and one reduce task")
    rng = random.Random(cfg.seed)
    lo, hi = cfg.processing_range
    tasks = tuple(Task(i, rng.randint(lo, hi)) for i in range(n_map + n_reduce))
    edges = tuple(
        _draw_edge(rng, m, n_map + r, cfg) for m in range(n_map) for r in range(n_reduce)
    )
    return ProblemInstance(JobGraph(tasks, edges), _network(cfg))


def gen_random_dag(n_tasks: int, edge_prob: float, cfg: GenConfig) -> ProblemInstance:
    """Each forward pair (i < j) gets an edge independently with ``edge_prob``."""
    if n_tasks < 1:
        raise ValueError("need at least one task")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = random.Random(cfg.seed)
    lo, hi = cfg.processing_range
    tasks = tuple(Task(i, rng.randint(lo, hi)) for i in range(n_tasks))
    edges = []
    for i in range(n_tasks):
        for j in range(i + 1, n_tasks):
            if rng.random() < edge_prob:
                edges.append(_draw_edge(rng, i, j, cfg))
    return ProblemInstance(JobGraph(tasks, tuple(edges)), _network(cfg))
