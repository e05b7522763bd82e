"""Simulation outputs: per-lane counters and per-phase timing."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

COUNTERS = ("tasks_run", "edges_processed", "messages_sent", "dram_ops", "busy_cycles")
CSV_COLUMNS = ("kernel", "graph", "scale", "nodes", "lanes", "phase", "work", "cycles", "seconds")


class LaneCounters:
    def __init__(self, lanes: int):
        for name in COUNTERS:
            setattr(self, name, np.zeros(lanes, dtype=np.int64))

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in COUNTERS}

    def totals(self) -> dict:
        return {name: int(getattr(self, name).sum()) for name in COUNTERS}


@dataclass(frozen=True)
class PhaseRecord:
    label: str
    work: int
    cycles: int


@dataclass(frozen=True, eq=False)
class SimResult:
    elapsed_cycles: int
    clock_hz: float
    counters: LaneCounters
    phases: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def elapsed_seconds(self) -> float:
        return self.elapsed_cycles / self.clock_hz

    @property
    def lane_count(self) -> int:
        return self.counters.tasks_run.shape[0]

    def total_work(self) -> int:
        return int(self.counters.edges_processed.sum())

    def to_dict(self, per_lane: bool = False) -> dict:
        d = {
            "elapsed_cycles": int(self.elapsed_cycles),
            "elapsed_seconds": self.elapsed_seconds,
            "clock_hz": self.clock_hz,
            "lanes": self.lane_count,
            "totals": self.counters.totals(),
            "max_busy_cycles": int(self.counters.busy_cycles.max(initial=0)),
            "phases": [{"label": p.label, "work": int(p.work), "cycles": int(p.cycles)} for p in self.phases],
            "meta": self.meta,
        }
        if per_lane:
            d["per_lane"] = {k: v.tolist() for k, v in self.counters.as_dict().items()}
        return d

    def to_json(self, per_lane: bool = False) -> str:
        return json.dumps(self.to_dict(per_lane), indent=2, sort_keys=True, default=_jsonable)

    def csv_rows(self) -> list[dict]:
        m = self.meta
        return [{
            "kernel": m.get("kernel", ""),
            "graph": m.get("graph", ""),
            "scale": m.get("scale", ""),
            "nodes": m.get("nodes", ""),
            "lanes": m.get("lanes", self.lane_count),
            "phase": p.label,
            "work": int(p.work),
            "cycles": int(p.cycles),
            "seconds": p.cycles / self.clock_hz,
        } for p in self.phases]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.csv_rows())
        return buf.getvalue()


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")
