"""JSON serialization for instances and schedules.

Instance files:

    {"tasks": [{"id": 0, "p": 5}, ...],
     "edges": [{"u": 0, "v": 1, "d": 40, "r": 0}, ...],
     "network": {"racks": 4, "subchannels": 1,
                 "wired_bw": 10000, "wireless_bw": 10000}}

``r`` may be omitted and defaults to 0.  Schedule files:

    {"tasks": [{"id": 0, "rack": 1, "start": 0}, ...],
     "edges": [{"u": 0, "v": 1, "channel": "wired", "start": 5}, ...]}

where ``channel`` is "local", "wired", or {"wireless": k} with a 1-based
subchannel index.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import (
    LOCAL,
    WIRED,
    Channel,
    DataEdge,
    EdgeSlot,
    JobGraph,
    NetworkConfig,
    ProblemInstance,
    Schedule,
    Task,
    TaskSlot,
    wireless,
)


class FormatError(ValueError):
    """Raised when a JSON document does not match the expected schema."""


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "tasks": [{"id": t.id, "p": t.processing_time} for t in instance.job.tasks],
        "edges": [
            {"u": e.producer, "v": e.consumer, "d": e.data_size, "r": e.local_delay}
            for e in instance.job.edges
        ],
        "network": {
            "racks": instance.network.rack_count,
            "subchannels": instance.network.subchannel_count,
            "wired_bw": instance.network.wired_bandwidth,
            "wireless_bw": instance.network.wireless_bandwidth,
        },
    }


def instance_from_dict(data: dict) -> ProblemInstance:
    try:
        tasks = tuple(Task(int(t["id"]), int(t["p"])) for t in data["tasks"])
        edges = tuple(
            DataEdge(int(e["u"]), int(e["v"]), int(e["d"]), int(e.get("r", 0)))
            for e in data.get("edges", [])
        )
        net = data["network"]
        network = NetworkConfig(
            rack_count=int(net["racks"]),
            subchannel_count=int(net["subchannels"]),
            wired_bandwidth=int(net["wired_bw"]),
            wireless_bandwidth=int(net["wireless_bw"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed instance document: {exc}") from exc
    return ProblemInstance(JobGraph(tasks, edges), network)


def _channel_to_json(channel: Channel):
    if channel.is_local:
        return "local"
    if channel.is_wired:
        return "wired"
    return {"wireless": channel.subchannel}


def _channel_from_json(value) -> Channel:
    if value == "local":
        return LOCAL
    if value == "wired":
        return WIRED
    if isinstance(value, dict) and set(value) == {"wireless"}:
        return wireless(int(value["wireless"]))
    raise FormatError(f"malformed channel value: {value!r}")


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "tasks": [
            {"id": v, "rack": slot.rack, "start": slot.start}
            for v, slot in sorted(schedule.task_slots.items())
        ],
        "edges": [
            {"u": u, "v": v, "channel": _channel_to_json(slot.channel), "start": slot.start}
            for (u, v), slot in sorted(schedule.edge_slots.items())
        ],
    }


def schedule_from_dict(data: dict) -> Schedule:
    try:
        task_slots = {
            int(t["id"]): TaskSlot(int(t["rack"]), int(t["start"])) for t in data["tasks"]
        }
        edge_slots = {
            (int(e["u"]), int(e["v"])): EdgeSlot(_channel_from_json(e["channel"]), int(e["start"]))
            for e in data.get("edges", [])
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed schedule document: {exc}") from exc
    return Schedule(task_slots, edge_slots)


def load_instance(path: str | Path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
    return instance_from_dict(data)


def save_instance(instance: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance), encoding="utf-8")


def dumps_instance(instance: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def load_schedule(path: str | Path) -> Schedule:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"not valid JSON: {exc}") from exc
    return schedule_from_dict(data)


def save_schedule(schedule: Schedule, path: str | Path) -> None:
    Path(path).write_text(dumps_schedule(schedule), encoding="utf-8")


def dumps_schedule(schedule: Schedule) -> str:
    return json.dumps(schedule_to_dict(schedule), indent=2) + "\n"
