"""Lane-machine parameters: sizes, per-operation cycle costs, latencies."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

DEFAULT_COSTS = {
    "thread_create": 0,
    "thread_yield": 1,
    "thread_dealloc": 1,
    "send_message": 2,
    "dram_issue": 2,
}

DEFAULT_LATENCIES_NS = {
    "local_dram_roundtrip_ns": 150.0,
    "remote_dram_roundtrip_ns": 1250.0,
    "local_message_ns": 150.0,
    "remote_message_ns": 500.0,
}

# instruction budgets of the kernel handlers (calibration knobs)
DEFAULT_HANDLERS = {
    "update": 10,   # per-edge update / pulled-value accumulate
    "item": 8,      # per work item setup before the adjacency read
    "finalize": 10,  # pull-side combine after all neighbor values arrive
    "flag": 4,      # set a bit in the next active set
    "apply": 4,     # per owned vertex end-of-iteration bookkeeping
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MachineConfig:
    node_count: int = 1
    lanes_per_node: int = 2048
    clock_hz: float = 2e9
    hw_threads_per_lane: int = 128
    scratchpad_bytes: int = 65536
    cache_entry_bytes: int = 16
    costs: dict = field(default_factory=lambda: dict(DEFAULT_COSTS))
    latencies: dict = field(default_factory=lambda: dict(DEFAULT_LATENCIES_NS))
    handlers: dict = field(default_factory=lambda: dict(DEFAULT_HANDLERS))

    def __post_init__(self):
        # fill in missing table entries so partial configs work
        for name, default in (("costs", DEFAULT_COSTS), ("latencies", DEFAULT_LATENCIES_NS),
                              ("handlers", DEFAULT_HANDLERS)):
            given = getattr(self, name)
            unknown = set(given) - set(default)
            if unknown:
                raise ConfigError(f"unknown {name} keys: {sorted(unknown)}")
            object.__setattr__(self, name, {**default, **given})
        self.validate()

    def validate(self) -> None:
        for name in ("node_count", "lanes_per_node", "hw_threads_per_lane", "scratchpad_bytes",
                     "cache_entry_bytes"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.clock_hz <= 0:
            raise ConfigError("clock_hz must be positive")
        for table in (self.costs, self.latencies, self.handlers):
            for k, v in table.items():
                if v < 0:
                    raise ConfigError(f"{k} must be >= 0")

    @property
    def total_lanes(self) -> int:
        return self.node_count * self.lanes_per_node

    @property
    def cache_entries(self) -> int:
        return max(1, self.scratchpad_bytes // self.cache_entry_bytes)

    def cycles(self, ns: float) -> int:
        return int(round(ns * self.clock_hz / 1e9))

    def latency_cycles(self, key: str) -> int:
        return self.cycles(self.latencies[key])

    def barrier_cycles(self) -> int:
        """Completion reduction over lanes of a node, then across nodes.

        No broadcast term: the next phase starts with its own spawn tree.
        """
        send = self.costs["send_message"]
        intra = math.ceil(math.log2(self.lanes_per_node)) * (self.latency_cycles("local_message_ns") + send)
        inter = math.ceil(math.log2(self.node_count)) * (self.latency_cycles("remote_message_ns") + send)
        return intra + inter

    def with_lanes(self, node_count: int, lanes_per_node: int | None = None) -> "MachineConfig":
        return replace(self, node_count=node_count,
                       lanes_per_node=self.lanes_per_node if lanes_per_node is None else lanes_per_node)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MachineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown machine config keys: {sorted(unknown)}")
        return cls(**d)


def load_machine_config(path, overrides: dict | None = None) -> MachineConfig:
    """Read a JSON object of MachineConfig fields; ``overrides`` win over the file."""
    data = json.loads(Path(path).read_text()) if path is not None else {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    for k, v in (overrides or {}).items():
        if isinstance(v, dict):
            data[k] = {**data.get(k, {}), **v}
        elif v is not None:
            data[k] = v
    return MachineConfig.from_dict(data)
