"""Vertex splitting: bound per-vertex degree by cutting hubs into mirrors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Graph, undirect

DEFAULT_SPLIT_SIZE = 1024


@dataclass(frozen=True, eq=False)
class SplitGraph:
    """Graph over split vertices plus the mirror -> original map.

    Ids below ``original_vertex_count`` are the originals (a hub keeps its id
    for its first chunk); extra mirrors are appended after them.
    """

    base: Graph
    master_of: np.ndarray
    split_size: int
    original_vertex_count: int
    reduction_arity: int = 2

    @property
    def vertex_count(self) -> int:
        return self.base.vertex_count

    @property
    def mirror_count(self) -> int:
        return self.base.vertex_count - self.original_vertex_count

    def copies_per_master(self) -> np.ndarray:
        return np.bincount(self.master_of, minlength=self.original_vertex_count)

    def merged(self) -> Graph:
        """Merge mirrors back into their masters."""
        pairs = self.base.edge_pairs()
        return undirect(self.master_of[pairs], self.original_vertex_count, self.base.scale)


def split_vertices(g: Graph, split_size: int = DEFAULT_SPLIT_SIZE, reduction_arity: int = 2) -> SplitGraph:
    """Replace every vertex of degree > ``split_size`` by ceil(deg/split_size) mirrors.

    Each mirror owns a contiguous chunk of the hub's sorted adjacency. An
    undirected edge {u, v} becomes an edge between the mirror of u whose chunk
    holds v and the mirror of v whose chunk holds u.
    """
    if split_size < 2:
        raise ValueError("split_size must be at least 2")
    n = g.vertex_count
    deg = g.degrees
    copies = np.maximum(1, -(-deg // split_size))
    if np.all(copies == 1):
        return SplitGraph(g, np.arange(n, dtype=np.int64), split_size, n, reduction_arity)

    # id of the k-th chunk of v: v itself for k == 0, appended ids otherwise
    extra = copies - 1
    extra_start = n + np.concatenate([[0], np.cumsum(extra)[:-1]])
    total = n + int(extra.sum())
    master_of = np.empty(total, dtype=np.int64)
    master_of[:n] = np.arange(n)
    master_of[n:] = np.repeat(np.arange(n), extra)

    src = g.edge_sources()
    pos = np.arange(g.indices.shape[0]) - g.indptr[src]
    chunk = pos // split_size
    chunk_id = np.where(chunk == 0, src, extra_start[src] + chunk - 1)

    # chunk_id[e] is the mirror of src[e] that owns entry e; find the twin entry (v, u)
    n_e = g.indices.shape[0]
    fwd_key = src * n + g.indices
    rev_key = g.indices * n + src
    order = np.argsort(fwd_key, kind="stable")
    twin = order[np.searchsorted(fwd_key[order], rev_key)]
    assert n_e == 0 or np.array_equal(fwd_key[twin], rev_key)
    pairs = np.stack([chunk_id, chunk_id[twin]], axis=1)
    base = undirect(pairs, total, g.scale)
    return SplitGraph(base, master_of, split_size, n, reduction_arity)


def as_split(g) -> SplitGraph:
    """Wrap a plain Graph as a trivial SplitGraph (identity master map)."""
    if isinstance(g, SplitGraph):
        return g
    return SplitGraph(g, np.arange(g.vertex_count, dtype=np.int64), max(2, int(g.degrees.max(initial=0))),
                      g.vertex_count)
