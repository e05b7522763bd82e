"""Compressed undirected graph and the basic operations on it."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphFormatError(ValueError):
    """Malformed edge input (out-of-range ids, bad file contents)."""


class CapacityError(MemoryError):
    """Requested graph would not fit in the configured memory budget."""


class InsufficientDataError(ValueError):
    """Too few measurements to fit an extrapolation."""


# bytes; generators refuse to build graphs whose CSR would exceed this
DEFAULT_MEMORY_BUDGET = 2 * 1024**3


@dataclass(frozen=True, eq=False)
class Graph:
    """Symmetric CSR adjacency.

    ``indptr`` has ``vertex_count + 1`` entries and ``indices`` holds each
    vertex's neighbors sorted ascending. Every undirected edge appears twice.
    """

    vertex_count: int
    indptr: np.ndarray
    indices: np.ndarray
    scale: int = 0

    def __post_init__(self):
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False

    @property
    def undirected_edge_count(self) -> int:
        return int(self.indices.shape[0] // 2)

    @property
    def directed_edge_count(self) -> int:
        return int(self.indices.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_sources(self) -> np.ndarray:
        """Source vertex of every entry in ``indices``."""
        return np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees)

    def edge_pairs(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array with ``u < v``, sorted."""
        src = self.edge_sources()
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def same_as(self, other: "Graph") -> bool:
        return (
            self.vertex_count == other.vertex_count
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def check(self) -> None:
        """Raise AssertionError if any structural invariant is violated."""
        n = self.vertex_count
        assert self.indptr.shape == (n + 1,)
        assert self.indptr[0] == 0 and self.indptr[-1] == self.indices.shape[0]
        assert np.all(np.diff(self.indptr) >= 0)
        if self.indices.size == 0:
            return
        assert self.indices.min() >= 0 and self.indices.max() < n
        src = self.edge_sources()
        assert not np.any(src == self.indices), "self-loop"
        # strictly increasing within each row => sorted and duplicate free
        same_row = src[1:] == src[:-1]
        assert np.all(self.indices[1:][same_row] > self.indices[:-1][same_row])
        fwd = src * n + self.indices
        rev = self.indices * n + src
        assert np.array_equal(np.sort(fwd), np.sort(rev)), "asymmetric"


def from_csr(indptr, indices, scale: int = 0) -> Graph:
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    return Graph(int(indptr.shape[0] - 1), indptr, indices, scale)


def undirect(edges, vertex_count: int | None = None, scale: int = 0) -> Graph:
    """Build a symmetric, deduplicated, self-loop-free graph from directed pairs.

    ``edges`` is anything convertible to an ``(m, 2)`` integer array. When
    ``vertex_count`` is omitted it is one past the largest id seen.
    """
    e = np.asarray(edges, dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise GraphFormatError(f"expected (m, 2) edge array, got shape {e.shape}")
    if vertex_count is None:
        vertex_count = int(e.max()) + 1 if e.size else 0
    n = int(vertex_count)
    if e.size and (e.min() < 0 or e.max() >= n):
        bad = e[(e < 0).any(axis=1) | (e >= n).any(axis=1)][0]
        raise GraphFormatError(f"edge {tuple(bad)} out of range for {n} vertices")

    u, v = e[:, 0], e[:, 1]
    keep = u != v
    lo = np.minimum(u[keep], v[keep])
    hi = np.maximum(u[keep], v[keep])
    key = np.unique(lo * n + hi) if n else np.empty(0, np.int64)
    lo, hi = key // max(n, 1), key % max(n, 1)
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, indptr, np.ascontiguousarray(dst), scale)


def empty_graph(vertex_count: int, scale: int = 0) -> Graph:
    return undirect(np.empty((0, 2), np.int64), vertex_count, scale)


def induced_on_connected(g: Graph) -> tuple[Graph, np.ndarray]:
    """Drop isolated vertices; returns the relabelled graph and the kept ids."""
    keep = np.flatnonzero(g.degrees > 0)
    relabel = np.full(g.vertex_count, -1, dtype=np.int64)
    relabel[keep] = np.arange(keep.size)
    pairs = g.edge_pairs()
    return undirect(relabel[pairs], keep.size, g.scale), keep


@dataclass(frozen=True)
class DegreeStats:
    max_degree: int
    mean_degree: float
    connected_vertex_count: int
    vertex_count: int
    # bucket b counts vertices with degree in [2**b, 2**(b+1)); degree 0 excluded
    degree_histogram: tuple[int, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "connected_vertices": self.connected_vertex_count,
            "max_degree": self.max_degree,
            "mean_degree": self.mean_degree,
            "degree_histogram": list(self.degree_histogram),
        }


def degree_stats(g: Graph) -> DegreeStats:
    deg = g.degrees
    if g.vertex_count == 0:
        return DegreeStats(0, 0.0, 0, 0, ())
    nz = deg[deg > 0]
    if nz.size:
        buckets = np.bincount(np.floor(np.log2(nz)).astype(np.int64))
    else:
        buckets = np.zeros(0, np.int64)
    return DegreeStats(
        max_degree=int(deg.max()),
        mean_degree=float(deg.mean()),
        connected_vertex_count=int(nz.size),
        vertex_count=g.vertex_count,
        degree_histogram=tuple(int(b) for b in buckets),
    )


def extrapolate_property(scales, values, target_scale) -> float:
    """Least-squares fit of ``log2(value)`` against scale, evaluated at ``target_scale``."""
    slope, intercept = fit_log_linear(scales, values)
    return float(2.0 ** (intercept + slope * target_scale))


def fit_log_linear(scales, values) -> tuple[float, float]:
    s = np.asarray(scales, dtype=float)
    y = np.asarray(values, dtype=float)
    if s.shape != y.shape:
        raise ValueError("scales and values differ in length")
    if np.unique(s).size < 2:
        raise InsufficientDataError("need measurements at two or more distinct scales")
    if np.any(y <= 0):
        raise ValueError("log-linear extrapolation needs positive values")
    slope, intercept = np.polyfit(s, np.log2(y), 1)
    return float(slope), float(intercept)
