"""Router graphs with dual-homed compute nodes, and all-pairs minimal routing."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

MAX_RADIX = 64  # next-hop sets are bitmasks over a router's neighbor slots


class TopologyError(ValueError):
    def __init__(self, message: str, achieved_diameter: int | None = None):
        super().__init__(message)
        self.achieved_diameter = achieved_diameter


@dataclass(frozen=True)
class Topology:
    """Router-router links as symmetric CSR; every compute node attaches to two distinct routers.

    ``radix`` bounds router-router ports; node attachments use separate ports.
    """

    router_count: int
    indptr: np.ndarray
    neighbors: np.ndarray
    attach: np.ndarray  # [node_count, 2] router ids
    radix: int
    link_bandwidth: float = 2200.0  # bytes/ns
    hop_latency_ns: int = 100
    source: str = "synthetic"

    @property
    def node_count(self) -> int:
        return int(self.attach.shape[0])

    @property
    def link_count(self) -> int:
        """Directed router-router links."""
        return int(self.neighbors.size)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.router_count), self.degrees)
        keep = src < self.neighbors
        return np.stack([src[keep], self.neighbors[keep]], axis=1)

    def validate(self) -> None:
        if self.router_count < 1:
            raise TopologyError("need at least one router")
        deg = self.degrees
        if deg.size and deg.max() > self.radix:
            raise TopologyError(f"router degree {deg.max()} exceeds radix {self.radix}")
        if self.radix > MAX_RADIX:
            raise TopologyError(f"radix above {MAX_RADIX} not supported")
        if self.attach.size:
            if self.attach.min() < 0 or self.attach.max() >= self.router_count:
                raise TopologyError("node attached to unknown router")
            if np.any(self.attach[:, 0] == self.attach[:, 1]):
                raise TopologyError("node attachments must be two distinct routers")
        src = np.repeat(np.arange(self.router_count), deg)
        if np.any(src == self.neighbors):
            raise TopologyError("self loop in router graph")
        fwd = set(zip(src.tolist(), self.neighbors.tolist()))
        if any((v, u) not in fwd for u, v in fwd):
            raise TopologyError("router links must be symmetric")
        if len(fwd) != self.neighbors.size:
            raise TopologyError("duplicate router link")


def _from_edges(router_count: int, edges, attach, radix: int | None, **kw) -> Topology:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    both = np.concatenate([e, e[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    indptr = np.zeros(router_count + 1, dtype=np.int64)
    np.add.at(indptr, both[:, 0] + 1, 1)
    indptr = np.cumsum(indptr)
    deg = np.diff(indptr)
    if radix is None:
        radix = int(deg.max()) if deg.size else 0
    t = Topology(router_count, indptr, both[:, 1].copy(), np.asarray(attach, dtype=np.int64).reshape(-1, 2),
                 int(radix), **kw)
    t.validate()
    return t


def round_robin_attach(node_count: int, router_count: int) -> np.ndarray:
    """Node i takes attachment slots 2i and 2i+1 dealt round-robin over routers."""
    if node_count and router_count < 2:
        raise TopologyError("dual-homed nodes need at least 2 routers")
    slots = np.arange(2 * node_count, dtype=np.int64).reshape(-1, 2)
    return slots % max(router_count, 1)


def router_diameter(t: Topology) -> int:
    d = router_distances(t)
    return int(d.max()) if d.size else 0


def router_distances(t: Topology) -> np.ndarray:
    n = t.router_count
    adj = csr_matrix((np.ones(t.neighbors.size), t.neighbors, t.indptr), shape=(n, n))
    d = shortest_path(adj, method="D", unweighted=True, directed=False)
    if np.isinf(d).any():
        raise TopologyError("router graph is disconnected")
    return d.astype(np.int64)


def synthetic_topology(router_count: int, radix: int, node_count: int, seed: int = 0,
                       max_diameter: int = 3, attempts: int = 32, **kw) -> Topology:
    """Random ``radix``-regular router graph, redrawn until its diameter is at most ``max_diameter``."""
    if router_count == 2:
        return _from_edges(2, [(0, 1)], round_robin_attach(node_count, 2), max(radix, 1), **kw)
    if radix >= router_count:
        edges = [(u, v) for u in range(router_count) for v in range(u + 1, router_count)]
        return _from_edges(router_count, edges, round_robin_attach(node_count, router_count), radix, **kw)
    if radix * router_count % 2:
        raise TopologyError("radix * router_count must be even for a regular router graph")
    best = None
    for i in range(attempts):
        g = nx.random_regular_graph(radix, router_count, seed=seed * 1000003 + i)
        t = _from_edges(router_count, list(g.edges()), round_robin_attach(node_count, router_count), radix,
                        source=f"random-regular(seed={seed},try={i})", **kw)
        try:
            diam = router_diameter(t)
        except TopologyError:
            continue
        if diam <= max_diameter:
            return t
        best = diam if best is None else min(best, diam)
    raise TopologyError(f"no radix-{radix} graph on {router_count} routers with diameter <= {max_diameter} "
                        f"in {attempts} tries; best {best}", best)


def read_topology(path, radix: int | None = None, **kw) -> Topology:
    """Text format: ``R u v`` per router link, ``N n r1 r2`` per node; ``#`` comments."""
    links, nodes = [], {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "R" and len(parts) == 3:
                links.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "N" and len(parts) == 4:
                nodes[int(parts[1])] = (int(parts[2]), int(parts[3]))
            else:
                raise ValueError
        except ValueError:
            raise TopologyError(f"{path}:{ln}: expected 'R u v' or 'N n r1 r2'") from None
    if sorted(nodes) != list(range(len(nodes))):
        raise TopologyError("node ids must be 0..n-1")
    e = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    ids = [e.ravel()] + [np.asarray(list(nodes.values()), dtype=np.int64).ravel()]
    router_count = int(max((a.max() for a in ids if a.size), default=-1)) + 1
    e = np.unique(np.sort(e, axis=1), axis=0)
    attach = np.array([nodes[i] for i in range(len(nodes))], dtype=np.int64).reshape(-1, 2)
    kw.setdefault("source", str(path))
    return _from_edges(router_count, e, attach, radix, **kw)


def write_topology(t: Topology, path) -> None:
    lines = [f"# routers={t.router_count} nodes={t.node_count} radix={t.radix}"]
    lines += [f"R {u} {v}" for u, v in t.edges()]
    lines += [f"N {i} {a} {b}" for i, (a, b) in enumerate(t.attach)]
    Path(path).write_text("\n".join(lines) + "\n")


def build_topology(spec, **kw) -> Topology:
    """``spec`` is a topology file path or a dict {router_count, radix, node_count[, seed]}."""
    if isinstance(spec, (str, Path)):
        return read_topology(spec, **kw)
    spec = dict(spec)
    return synthetic_topology(int(spec.pop("router_count")), int(spec.pop("radix")), int(spec.pop("node_count")),
                              **spec, **kw)


@dataclass(frozen=True)
class RoutingTable:
    """dist[r, d] in router hops; nexthop[r, d] has bit i set when neighbor slot i of r is on a minimal path."""

    dist: np.ndarray
    nexthop: np.ndarray

    @property
    def diameter(self) -> int:
        return int(self.dist.max()) if self.dist.size else 0

    def next_hops(self, t: Topology, r: int, d: int) -> np.ndarray:
        nb = t.neighbors[t.indptr[r]:t.indptr[r + 1]]
        bits = int(self.nexthop[r, d])
        return nb[[i for i in range(nb.size) if bits >> i & 1]]


def compute_routes(t: Topology) -> RoutingTable:
    dist = router_distances(t)
    n = t.router_count
    nexthop = np.zeros((n, n), dtype=np.uint64)
    for r in range(n):
        nb = t.neighbors[t.indptr[r]:t.indptr[r + 1]]
        closer = dist[nb] == dist[r][None, :] - 1  # [slot, dest]
        for i in range(nb.size):
            nexthop[r, closer[i]] |= np.uint64(1) << np.uint64(i)
    return RoutingTable(dist, nexthop)


def no_load_latency_ns(t: Topology, routes: RoutingTable) -> int:
    """Worst node-to-node latency on an empty network: two node links plus the router diameter."""
    return (routes.diameter + 2) * t.hop_latency_ns


def router_demand(t: Topology, offered_bytes_per_ns: float) -> np.ndarray:
    """Expected bytes/ns from each source router to each destination router under uniform traffic.

    Injection alternates a node's two links; each message heads for the nearer
    of its destination's routers (as in the simulator).
    """
    n = t.node_count
    demand = np.zeros((t.router_count, t.router_count))
    if n < 2:
        return demand
    dist = router_distances(t)
    share = offered_bytes_per_ns / 2.0 / (n - 1)
    a = t.attach
    for link in range(2):
        src = a[:, link]
        pick = dist[src[:, None], a[None, :, 0]] <= dist[src[:, None], a[None, :, 1]]
        dst = np.where(pick, a[None, :, 0], a[None, :, 1])
        np.fill_diagonal(dst, -1)
        s_idx = np.broadcast_to(src[:, None], dst.shape)
        keep = dst >= 0
        np.add.at(demand, (s_idx[keep], dst[keep]), share)
    return demand


def expected_link_loads(t: Topology, routes: RoutingTable, offered_bytes_per_ns: float) -> np.ndarray:
    """Bytes/ns on every directed router link when flow splits evenly over minimal next hops."""
    demand = router_demand(t, offered_bytes_per_ns)
    load = np.zeros(t.link_count)
    for d in range(t.router_count):
        flow = demand[:, d].copy()
        for r in np.argsort(-routes.dist[:, d], kind="stable"):
            if r == d or flow[r] == 0:
                continue
            lo = t.indptr[r]
            bits = int(routes.nexthop[r, d])
            slots = [i for i in range(t.indptr[r + 1] - lo) if bits >> i & 1]
            part = flow[r] / len(slots)
            for i in slots:
                load[lo + i] += part
                flow[t.neighbors[lo + i]] += part
    return load


def saturating_link_bandwidth(t: Topology, routes: RoutingTable, offered_bytes_per_ns: float) -> float:
    """Link bandwidth at which the busiest router link exactly carries its expected minimal-routing load."""
    if t.link_count == 0:
        return math.inf
    return float(expected_link_loads(t, routes, offered_bytes_per_ns).max())
