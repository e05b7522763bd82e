"""Shared plumbing for the simulated kernels."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph, SplitGraph, as_split
from ..machine import LaneCounters, MachineConfig, PhaseEngine, PhaseRecord, SimResult, owner_lanes


class ActiveSet:
    """Bitmask over vertices, packed 8 per byte."""

    def __init__(self, vertex_count: int, bits: np.ndarray | None = None):
        self.vertex_count = vertex_count
        self.bits = np.zeros((vertex_count + 7) // 8, dtype=np.uint8) if bits is None else bits

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "ActiveSet":
        return cls(mask.shape[0], np.packbits(mask.astype(bool), bitorder="little"))

    @classmethod
    def full(cls, vertex_count: int) -> "ActiveSet":
        return cls.from_mask(np.ones(vertex_count, dtype=bool))

    def mask(self) -> np.ndarray:
        return np.unpackbits(self.bits, count=self.vertex_count, bitorder="little").astype(bool)

    def vertices(self) -> np.ndarray:
        return np.flatnonzero(self.mask())

    def add(self, vertices) -> None:
        m = self.mask()
        m[np.asarray(vertices, dtype=np.int64)] = True
        self.bits = np.packbits(m, bitorder="little")

    @property
    def active_count(self) -> int:
        return int(np.bitwise_count(self.bits).sum())

    def active_volume(self, degrees: np.ndarray) -> int:
        return int(degrees[self.mask()].sum())

    def __bool__(self) -> bool:
        return bool(self.bits.any())


@dataclass(eq=False)
class BFSResult:
    distance: np.ndarray
    frontiers: list  # (level, vertex count, edge volume)
    edges_traversed: int
    work: int
    gteps: float
    sim: SimResult
    directions: list = field(default_factory=list)

    @property
    def elapsed_seconds(self) -> float:
        return self.sim.elapsed_seconds


@dataclass(eq=False)
class PRResult:
    scores: np.ndarray
    iterations: int
    edges_traversed: int
    gteps: float
    sim: SimResult
    effective_gteps: float | None = None
    capped: bool = False
    reference_work: int | None = None
    active_history: list = field(default_factory=list)  # (iteration, active vertices, active volume)

    @property
    def elapsed_seconds(self) -> float:
        return self.sim.elapsed_seconds


def gteps(edges: int, seconds: float) -> float:
    return edges / seconds / 1e9 if seconds > 0 else 0.0


def split_reduction_cycles(config: MachineConfig, copies: int, arity: int) -> int:
    """Gather to the master and scatter back over an ``arity``-ary tree of ``copies`` mirrors."""
    if copies <= 1:
        return 0
    depth = math.ceil(math.log(copies, arity) - 1e-12)
    per_hop = (config.latency_cycles("remote_message_ns") + config.costs["send_message"]
               + config.handlers["update"])
    return 2 * depth * per_hop


class KernelRun:
    """Graph placement, compiled engine and phase log for one kernel execution."""

    def __init__(self, g: Graph | SplitGraph, config: MachineConfig, kernel: str):
        self.split = as_split(g)
        self.base = self.split.base
        self.config = config
        self.kernel = kernel
        self.lanes = config.total_lanes
        self.owner = owner_lanes(np.arange(self.base.vertex_count), self.lanes)
        self.counters = LaneCounters(self.lanes)
        self.engine = PhaseEngine(config, self.base.indices, self.owner, self.counters)
        self.barrier = config.barrier_cycles()
        self.phases: list[PhaseRecord] = []
        self.cycles = 0
        self.work = 0
        n0 = self.split.original_vertex_count
        self.master_of = self.split.master_of
        self.copies = self.split.copies_per_master()
        self.master_degree = np.bincount(self.master_of, weights=self.base.degrees,
                                         minlength=n0).astype(np.int64)
        # base ids of every master's copies, grouped by master
        order = np.argsort(self.master_of, kind="stable")
        self._mirror_order = order
        self._mirror_start = np.concatenate([[0], np.cumsum(self.copies)])
        self.owned_masters = np.bincount(self.owner[:n0], minlength=self.lanes)

    @property
    def original_vertex_count(self) -> int:
        return self.split.original_vertex_count

    def mirrors_of(self, masters: np.ndarray) -> np.ndarray:
        """All base vertices belonging to ``masters``."""
        masters = np.asarray(masters, dtype=np.int64)
        if self.split.mirror_count == 0:
            return masters
        lo = self._mirror_start[masters]
        cnt = self._mirror_start[masters + 1] - lo
        total = int(cnt.sum())
        starts = np.repeat(lo - np.concatenate([[0], np.cumsum(cnt)[:-1]]), cnt)
        return self._mirror_order[starts + np.arange(total)]

    def reduction_cycles(self, masters: np.ndarray) -> int:
        if self.split.mirror_count == 0 or len(masters) == 0:
            return 0
        return split_reduction_cycles(self.config, int(self.copies[masters].max()), self.split.reduction_arity)

    def run_phase(self, desc) -> int:
        cyc = self.engine.run(desc) + self.barrier
        self.phases.append(PhaseRecord(desc.label, desc.work, cyc))
        self.cycles += cyc
        self.work += desc.work
        return cyc

    def sim_result(self, **meta) -> SimResult:
        assert int(self.counters.edges_processed.sum()) == self.work
        m = {"kernel": self.kernel, "nodes": self.config.node_count, "lanes": self.lanes,
             "scale": self.base.scale, **meta}
        return SimResult(self.cycles, self.config.clock_hz, self.counters, tuple(self.phases), m)
