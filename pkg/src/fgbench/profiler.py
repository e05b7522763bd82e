"""Available edge parallelism per BFS level or PageRank iteration, computed without the machine model."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .kernels import bfs_levels, push_iterations
from .kernels.pagerank import ALPHA, DEFAULT_MAX_ITERS, data_driven_trace

PROFILE_COLUMNS = ("step", "ops", "algorithm", "graph", "scale")
BFS_MODES = ("discovery", "volume")
PR_VARIANTS = ("push", "data-driven")


@dataclass(frozen=True)
class ParallelismProfile:
    algorithm: str
    ops: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=np.int64)
        if ops.size and ops.min() < 0:
            raise ValueError("profile entries must be >= 0")
        object.__setattr__(self, "ops", ops)

    def __len__(self):
        return int(self.ops.size)

    @property
    def peak(self) -> int:
        return int(self.ops.max()) if self.ops.size else 0

    @property
    def total(self) -> int:
        return int(self.ops.sum())

    def rows(self, graph: str = "", scale: int | str = "") -> list[dict]:
        return [{"step": i, "ops": int(o), "algorithm": self.algorithm, "graph": graph, "scale": scale}
                for i, o in enumerate(self.ops)]

    def to_csv(self, graph: str = "", scale: int | str = "") -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=PROFILE_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows(graph, scale))
        return buf.getvalue()


def profile_bfs(g: Graph, source: int = 0, mode: str = "discovery") -> ParallelismProfile:
    """One entry per BFS level (eccentricity + 1 entries).

    ``discovery`` counts frontier edges that land on the next level, the edge
    operations that advance the search; ``volume`` counts every frontier edge,
    which is what push BFS examines.
    """
    if mode not in BFS_MODES:
        raise ValueError(f"mode must be one of {BFS_MODES}")
    dist, levels = bfs_levels(g, source)
    deg = g.degrees
    ops = []
    for lvl, f in enumerate(levels):
        if mode == "volume":
            ops.append(int(deg[f].sum()))
            continue
        lo = g.indptr[f]
        cnt = g.indptr[f + 1] - lo
        if cnt.sum() == 0:
            ops.append(0)
            continue
        idx = np.repeat(lo - np.cumsum(cnt) + cnt, cnt) + np.arange(int(cnt.sum()))
        ops.append(int(np.count_nonzero(dist[g.indices[idx]] == lvl + 1)))
    return ParallelismProfile("push_bfs", np.array(ops, dtype=np.int64),
                              {"source": int(source), "mode": mode})


def profile_pr(g: Graph, tol: float | None = None, variant: str = "push", alpha: float = ALPHA,
               max_iters: int = DEFAULT_MAX_ITERS) -> ParallelismProfile:
    """Edge operations per PageRank iteration.

    Push touches every directed edge each iteration. Data-driven touches the
    active-set volume; when it converges a trailing zero marks the first idle
    step.
    """
    if variant not in PR_VARIANTS:
        raise ValueError(f"variant must be one of {PR_VARIANTS}")
    if variant == "push":
        iters, capped = push_iterations(g, tol, alpha, max_iters)
        ops = np.full(iters, g.directed_edge_count, dtype=np.int64)
        return ParallelismProfile("push_pr", ops, {"iterations": iters, "capped": capped})
    _, hist, capped = data_driven_trace(g, tol, alpha, max_iters)
    ops = [vol for _, _, vol in hist]
    if not capped:
        ops.append(0)
    return ParallelismProfile("dd_pr", np.array(ops, dtype=np.int64),
                              {"iterations": len(hist), "capped": capped,
                               "active_vertices": [cnt for _, cnt, _ in hist]})
