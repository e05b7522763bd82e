"""Sequential reference implementations used as test oracles."""
from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp

from ..graph import Graph

UNREACHED = -1
DENSE_LIMIT = 4096


def seq_bfs_oracle(g: Graph, source: int) -> np.ndarray:
    """Textbook queue BFS; unreached vertices get -1."""
    if not 0 <= source < g.vertex_count:
        raise ValueError(f"source {source} out of range")
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    dist = [UNREACHED] * g.vertex_count
    dist[source] = 0
    q = deque([source])
    while q:
        v = q.popleft()
        dv = dist[v] + 1
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if dist[u] == UNREACHED:
                dist[u] = dv
                q.append(u)
    return np.asarray(dist, dtype=np.int64)


def bfs_levels(g: Graph, source: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Level-synchronous BFS; returns distances and the frontier of every level."""
    if not 0 <= source < g.vertex_count:
        raise ValueError(f"source {source} out of range")
    dist = np.full(g.vertex_count, UNREACHED, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    levels = []
    level = 0
    while frontier.size:
        levels.append(frontier)
        nbrs = gather_neighbors(g, frontier)
        nxt = np.unique(nbrs[dist[nbrs] == UNREACHED])
        level += 1
        dist[nxt] = level
        frontier = nxt
    return dist, levels


def gather_neighbors(g: Graph, vertices: np.ndarray) -> np.ndarray:
    """Concatenated adjacency lists of ``vertices``."""
    lo = g.indptr[vertices]
    cnt = g.indptr[vertices + 1] - lo
    total = int(cnt.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(cnt)[:-1]]), cnt)
    return g.indices[starts + np.arange(total)]


def power_iteration_oracle(g: Graph, tol: float, alpha: float = 0.85, max_iters: int = 10_000,
                           return_iterations: bool = False):
    """Power iteration x <- (1-alpha)/n + alpha * A D^-1 x from x = 1/n.

    Stops after the first iteration whose largest per-vertex change is below
    ``tol``; degree-0 vertices keep teleport mass only. The result is
    normalised to sum to 1. Uses a dense matrix up to ``DENSE_LIMIT`` vertices
    and a scipy sparse matrix above that.
    """
    n = g.vertex_count
    if n == 0:
        out = np.empty(0)
        return (out, 0) if return_iterations else out
    deg = g.degrees.astype(np.float64)
    inv = np.divide(1.0, deg, out=np.zeros(n), where=deg > 0)
    if n <= DENSE_LIMIT:
        a = np.zeros((n, n))
        a[g.edge_sources(), g.indices] = 1.0
        m = alpha * a * inv[None, :]
    else:
        a = sp.csr_matrix((np.ones(g.indices.shape[0]), g.indices, g.indptr), shape=(n, n))
        m = (a @ sp.diags(inv)).tocsr() * alpha
    x = np.full(n, 1.0 / n)
    teleport = (1.0 - alpha) / n
    it = 0
    while it < max_iters:
        new = teleport + m @ x
        it += 1
        done = np.max(np.abs(new - x)) < tol
        x = new
        if done:
            break
    x = x / x.sum()
    return (x, it) if return_iterations else x
