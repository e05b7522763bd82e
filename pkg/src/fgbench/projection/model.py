"""Runtime formulas for PageRank and BFS on p nodes, and sweeps over (p, scale)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

from .fit import WorkRateModel
from .workload import WorkloadCharacterization

PROJECTION_COLUMNS = ("algorithm", "family", "scale", "nodes", "runtime_s", "gteps", "effective_gteps", "feasible")
# vectors of 8-byte words per vertex each algorithm needs besides the edge list
VECTORS = {"pr": 3, "bfs": 2}


@dataclass(frozen=True)
class SystemParams:
    p: int
    lanes_per_node: int = 2048
    dram_roundtrip_s: float = 1250e-9
    split_size: int = 1024
    dram_bytes_per_node: float = 2.0 ** 39  # 8 HBM stacks; 8 PiB over 16384 nodes

    def __post_init__(self):
        if self.p < 1 or self.lanes_per_node < 1 or self.split_size < 1:
            raise ValueError("p, lanes_per_node and split_size must be >= 1")

    @property
    def lanes(self) -> int:
        return self.p * self.lanes_per_node

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Projection:
    algorithm: str
    family: str
    scale: int
    nodes: int
    runtime_s: float
    gteps: float
    effective_gteps: float
    feasible: bool
    work_per_lane: float

    def row(self) -> dict:
        return {k: getattr(self, k) for k in PROJECTION_COLUMNS}


def split_term(max_degree: float, split_size: int, p: int) -> float:
    """log2(max_degree / (split_size p)) clamped at 0."""
    return max(0.0, math.log2(max_degree / (split_size * p)))


def memory_bytes(edges: float, vertices: float, vectors: int) -> float:
    return 8.0 * 2.0 * edges + 8.0 * vertices * vectors


def project_pr(model: WorkRateModel, workload: WorkloadCharacterization, sys: SystemParams, scale: int,
               reference: WorkloadCharacterization | None = None) -> Projection:
    """runtime = iter [ (work/(iter p L)) / min(f, cutoff) + t_dram (split term + log2 p) ].

    ``reference`` is the baseline (push) workload whose work, divided by this
    runtime, gives the effective rate; without it effective equals plain GTEPS.
    """
    work = workload.quantity("work", scale)
    iters = workload.quantity("iter", scale)
    x = work / (iters * sys.lanes)
    sync = sys.dram_roundtrip_s * (split_term(workload.quantity("max_degree", scale), sys.split_size, sys.p)
                                   + math.log2(sys.p))
    runtime = iters * (x / float(model.rate(x)) + sync)
    ref_work = work if reference is None else reference.quantity("work", scale)
    need = memory_bytes(workload.quantity("edges", scale), workload.quantity("vertices", scale), VECTORS["pr"])
    return Projection(workload.algorithm, workload.family, scale, sys.p, runtime, work / runtime / 1e9,
                      ref_work / runtime / 1e9, need <= sys.p * sys.dram_bytes_per_node, x)


def project_bfs(model: WorkRateModel, workload: WorkloadCharacterization, sys: SystemParams, scale: int,
                literal: bool = False) -> Projection:
    """runtime = (2E+V)/(p L) / min(f, cutoff) + t_dram (split term + 2 log2 p) frontiers.

    The traversal term counts the whole graph once; only the sync term scales
    with the number of frontiers. ``literal=True`` multiplies both terms by
    frontiers instead.
    """
    e = workload.quantity("edges", scale)
    v = workload.quantity("vertices", scale)
    fr = workload.quantity("frontiers", scale)
    x = (2.0 * e + v) / sys.lanes
    traverse = x / float(model.rate(x))
    sync = sys.dram_roundtrip_s * (split_term(workload.quantity("max_degree", scale), sys.split_size, sys.p)
                                   + 2.0 * math.log2(sys.p))
    runtime = (traverse + sync) * fr if literal else traverse + sync * fr
    g = e / runtime / 1e9
    need = memory_bytes(e, v, VECTORS["bfs"])
    return Projection(workload.algorithm, workload.family, scale, sys.p, runtime, g, g,
                      need <= sys.p * sys.dram_bytes_per_node, x)


def sweep(model: WorkRateModel, workload: WorkloadCharacterization, node_counts, scales,
          reference: WorkloadCharacterization | None = None, literal: bool = False,
          **system_kw) -> list[Projection]:
    out = []
    is_bfs = "bfs" in workload.algorithm
    for s in scales:
        for p in node_counts:
            sys = SystemParams(int(p), **system_kw)
            if is_bfs:
                out.append(project_bfs(model, workload, sys, int(s), literal))
            else:
                out.append(project_pr(model, workload, sys, int(s), reference))
    return out


def projections_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=PROJECTION_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.row())
    return buf.getvalue()


def projections_json(rows) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2)
