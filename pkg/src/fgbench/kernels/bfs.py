"""Level-synchronous BFS variants: push, push-pull and load-balanced push."""
from __future__ import annotations

import numpy as np

from ..graph import Graph, SplitGraph
from ..machine import MachineConfig, balanced_phase, plain_phase
from .common import BFSResult, KernelRun, gteps
from .oracles import UNREACHED, gather_neighbors

TEPS_MODES = ("graph500", "directed")


def _first_hits(g: Graph, cand: np.ndarray, in_frontier: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each candidate, edges scanned until the first frontier neighbor, and whether one was found."""
    if cand.size == 0:
        return np.empty(0, np.int64), np.empty(0, bool)
    lo = g.indptr[cand]
    deg = g.indptr[cand + 1] - lo
    nbrs = gather_neighbors(g, cand)
    hit = in_frontier[nbrs]
    row_start = np.concatenate([[0], np.cumsum(deg)[:-1]])
    pos = np.arange(nbrs.shape[0]) - np.repeat(row_start, deg)
    big = np.iinfo(np.int64).max
    first = np.minimum.reduceat(np.where(hit, pos, big), row_start)
    found = first != big
    scanned = np.where(found, first + 1, deg)
    return scanned, found


def _bfs(g, config: MachineConfig, source: int, kernel: str, switch_fraction=None,
         balanced=False, teps_mode="graph500") -> BFSResult:
    if teps_mode not in TEPS_MODES:
        raise ValueError(f"teps_mode must be one of {TEPS_MODES}")
    run = KernelRun(g, config, kernel)
    if balanced and run.split.mirror_count:
        raise ValueError("lb_push_bfs runs on the unsplit graph")
    n0 = run.original_vertex_count
    if not 0 <= source < n0:
        raise ValueError(f"source {source} out of range [0, {n0})")
    base = run.base
    deg = base.degrees
    total_directed = base.directed_edge_count
    dist = np.full(base.vertex_count, UNREACHED, dtype=np.int64)
    frontier = run.mirrors_of([source])
    dist[frontier] = 0
    level = 0
    frontiers = []
    directions = []
    while frontier.size:
        masters = np.unique(run.master_of[frontier])
        volume = int(deg[frontier].sum())
        frontiers.append((level, int(masters.size), volume))
        pull = switch_fraction is not None and volume > switch_fraction * total_directed
        label = f"level {level}"
        if pull:
            cand = np.flatnonzero((dist == UNREACHED) & (deg > 0))
            in_frontier = np.zeros(base.vertex_count, dtype=bool)
            in_frontier[frontier] = True
            scanned, found = _first_hits(base, cand, in_frontier)
            new = cand[found]
            desc = plain_phase(label, int(scanned.sum()), cand, base.indptr[cand], scanned, run.owner,
                               run.lanes, pull=True)
        else:
            nbrs = gather_neighbors(base, frontier)
            new = np.unique(nbrs[dist[nbrs] == UNREACHED])
            if balanced:
                desc = balanced_phase(label, volume, frontier, base.indptr[frontier], deg[frontier], run.lanes)
            else:
                desc = plain_phase(label, volume, frontier, base.indptr[frontier], deg[frontier], run.owner,
                                   run.lanes)
        directions.append("pull" if pull else "push")
        if run.split.mirror_count and new.size:
            new_masters = np.unique(run.master_of[new])
            desc.extra_cycles = run.reduction_cycles(new_masters)
            new = run.mirrors_of(new_masters)
            new = new[dist[new] == UNREACHED]
        run.run_phase(desc)
        level += 1
        dist[new] = level
        frontier = np.sort(new)
    distance = dist[:n0].copy()
    if teps_mode == "graph500":
        traversed = int(run.master_degree[distance != UNREACHED].sum()) // 2
    else:
        traversed = run.work
    sim = run.sim_result(source=int(source))
    return BFSResult(distance, frontiers, traversed, run.work, gteps(traversed, sim.elapsed_seconds), sim,
                     directions)


def push_bfs(g: Graph | SplitGraph, machine: MachineConfig, source: int = 0,
             teps_mode: str = "graph500") -> BFSResult:
    """Every frontier vertex pushes its next distance to all neighbors."""
    return _bfs(g, machine, source, "push_bfs", teps_mode=teps_mode)


def push_pull_bfs(g: Graph | SplitGraph, machine: MachineConfig, source: int = 0,
                  switch_fraction: float = 0.10, teps_mode: str = "graph500") -> BFSResult:
    """Push, but pull on levels whose frontier volume exceeds ``switch_fraction`` of the directed edges."""
    if not 0.0 < switch_fraction < 1.0:
        raise ValueError("switch_fraction must be in (0, 1)")
    return _bfs(g, machine, source, "push_pull_bfs", switch_fraction=switch_fraction, teps_mode=teps_mode)


def lb_push_bfs(g: Graph | SplitGraph, machine: MachineConfig, source: int = 0,
                teps_mode: str = "graph500") -> BFSResult:
    """Push BFS whose frontier is spread with the load-balanced parallel-for (no vertex splitting)."""
    return _bfs(g, machine, source, "lb_push_bfs", balanced=True, teps_mode=teps_mode)
