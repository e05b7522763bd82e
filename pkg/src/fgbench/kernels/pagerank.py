"""Push and data-driven PageRank on the lane machine."""
from __future__ import annotations

import math

import numpy as np

from ..graph import Graph, SplitGraph
from ..machine import MachineConfig, plain_phase
from .common import ActiveSet, KernelRun, PRResult, gteps
from .oracles import gather_neighbors

ALPHA = 0.85
DEFAULT_MAX_ITERS = 1000
DD_SIM_MAX_ITERS = 5


def _default_tol(n: int, tol):
    return 1.0 / n if tol is None else float(tol)


def _neighbor_sums(run: KernelRun, contrib_master: np.ndarray) -> np.ndarray:
    """sum over neighbors u of contrib[u], per master, reduced over mirrors."""
    base = run.base
    c = contrib_master[run.master_of]
    acc = np.bincount(base.edge_sources(), weights=c[base.indices], minlength=base.vertex_count)
    if run.split.mirror_count:
        acc = np.bincount(run.master_of, weights=acc, minlength=run.original_vertex_count)
    return acc


def _contrib(x: np.ndarray, deg: np.ndarray, alpha: float) -> np.ndarray:
    return np.divide(alpha * x, deg, out=np.zeros_like(x), where=deg > 0)


def push_iterations(g: Graph, tol: float | None = None, alpha: float = ALPHA,
                    max_iters: int = DEFAULT_MAX_ITERS) -> tuple[int, bool]:
    """Iterations push PageRank needs to reach ``tol`` (no simulation); (count, capped)."""
    n = g.vertex_count
    tol = _default_tol(n, tol)
    deg = g.degrees.astype(np.float64)
    src = g.edge_sources()
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iters + 1):
        c = _contrib(x, deg, alpha)
        new = (1.0 - alpha) / n + np.bincount(src, weights=c[g.indices], minlength=n)
        if np.max(np.abs(new - x)) < tol:
            return it, False
        x = new
    return max_iters, True


def data_driven_trace(g: Graph, tol: float | None = None, alpha: float = ALPHA,
                      max_iters: int = DEFAULT_MAX_ITERS):
    """Data-driven PageRank without simulation.

    Returns (normalised scores, [(iteration, active vertices, active volume)], capped).
    """
    n = g.vertex_count
    tol = _default_tol(n, tol)
    deg = g.degrees
    src = g.edge_sources()
    x = np.full(n, 1.0 / n)
    active = np.ones(n, dtype=bool)
    history = []
    it = 0
    while active.any() and it < max_iters:
        it += 1
        act = np.flatnonzero(active)
        history.append((it, act.size, int(deg[act].sum())))
        sums = np.bincount(src, weights=_contrib(x, deg.astype(np.float64), alpha)[g.indices], minlength=n)
        new_act = (1.0 - alpha) / n + sums[act]
        moved = act[np.abs(new_act - x[act]) >= tol]
        x[act] = new_act
        active = np.zeros(n, dtype=bool)
        active[gather_neighbors(g, moved)] = True
    return x / x.sum(), history, bool(active.any())


def push_pagerank(g: Graph | SplitGraph, machine: MachineConfig, tol: float | None = None,
                  alpha: float = ALPHA, max_iters: int = DEFAULT_MAX_ITERS) -> PRResult:
    """Every vertex pushes alpha*score/degree to each neighbor once per iteration.

    Updates merge at the receiving lane through its software cache. Stops after
    the first iteration in which every score changes by less than ``tol``
    (default 1/n).
    """
    run = KernelRun(g, machine, "push_pagerank")
    n = run.original_vertex_count
    if n == 0:
        raise ValueError("empty graph")
    tol = _default_tol(n, tol)
    base = run.base
    deg_m = run.master_degree.astype(np.float64)
    items = np.flatnonzero(base.degrees > 0)
    elo = base.indptr[items]
    cnt = base.degrees[items]
    volume = int(cnt.sum())
    epi = run.owned_masters * machine.handlers["apply"]
    extra = run.reduction_cycles(np.flatnonzero(run.copies > 1))
    x = np.full(n, 1.0 / n)
    capped = True
    it = 0
    while it < max_iters:
        it += 1
        new = (1.0 - alpha) / n + _neighbor_sums(run, _contrib(x, deg_m, alpha))
        run.run_phase(plain_phase(f"iteration {it}", volume, items, elo, cnt, run.owner, run.lanes,
                                  use_cache=True, epilogue=epi, extra_cycles=extra))
        done = np.max(np.abs(new - x)) < tol
        x = new
        if done:
            capped = False
            break
    sim = run.sim_result(tol=tol, alpha=alpha)
    return PRResult(x / x.sum(), it, run.work, gteps(run.work, sim.elapsed_seconds), sim, capped=capped)


def data_driven_pagerank(g: Graph | SplitGraph, machine: MachineConfig, tol: float | None = None,
                         max_iters: int = DD_SIM_MAX_ITERS, alpha: float = ALPHA,
                         reference_max_iters: int = DEFAULT_MAX_ITERS) -> PRResult:
    """Active vertices pull neighbor scores and recompute; a vertex whose score moved
    by at least ``tol`` flags its neighbors into the next active set.

    ``effective_gteps`` divides the work push PageRank needs for the same
    convergence by this run's simulated time. When this run stops at
    ``max_iters`` the reference is push work over the same number of
    iterations; if push itself cannot converge within ``reference_max_iters``
    the value is NaN and ``capped`` is set.
    """
    run = KernelRun(g, machine, "data_driven_pagerank")
    n = run.original_vertex_count
    if n == 0:
        raise ValueError("empty graph")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    tol = _default_tol(n, tol)
    base = run.base
    deg_m = run.master_degree.astype(np.float64)
    bdeg = base.degrees
    x = np.full(n, 1.0 / n)
    active = ActiveSet.full(n)
    history = []
    it = 0
    apply_cost = machine.handlers["apply"]
    while active and it < max_iters:
        it += 1
        act = active.vertices()
        history.append((it, act.size, int(run.master_degree[act].sum())))
        sums = _neighbor_sums(run, _contrib(x, deg_m, alpha))
        new_act = (1.0 - alpha) / n + sums[act]
        changed = np.abs(new_act - x[act]) >= tol
        x[act] = new_act
        moved = act[changed]
        nxt = np.zeros(n, dtype=bool)
        if moved.size:
            nxt[run.master_of[gather_neighbors(base, run.mirrors_of(moved))]] = True
        items = run.mirrors_of(act)
        moved_mask = np.zeros(n, dtype=bool)
        moved_mask[moved] = True
        cnt = bdeg[items]
        nflag = np.where(moved_mask[run.master_of[items]], cnt, 0)
        epi = np.bincount(run.owner[act], minlength=run.lanes) * apply_cost
        run.run_phase(plain_phase(f"iteration {it}", int(cnt.sum()), items, base.indptr[items], cnt,
                                  run.owner, run.lanes, item_nflag=nflag, pull=True, epilogue=epi,
                                  extra_cycles=run.reduction_cycles(act[run.copies[act] > 1])))
        active = ActiveSet.from_mask(nxt)
    capped = bool(active)
    sim = run.sim_result(tol=tol, alpha=alpha, max_iters=max_iters)
    volume = base.directed_edge_count
    if capped:
        ref_iters, ref_capped = it, False
    else:
        ref_iters, ref_capped = push_iterations(run.split.merged() if run.split.mirror_count else base,
                                                tol, alpha, reference_max_iters)
    ref_work = ref_iters * volume
    eff = math.nan if ref_capped else gteps(ref_work, sim.elapsed_seconds)
    return PRResult(x / x.sum(), it, run.work, gteps(run.work, sim.elapsed_seconds), sim,
                    effective_gteps=eff, capped=capped or ref_capped, reference_work=ref_work,
                    active_history=history)
