"""General event-calendar simulator of the lane machine.

Each lane is a FIFO server that runs one task at a time. Tasks are Python
handlers ``handler(ctx, *payload)`` that charge cycles and issue messages or
DRAM accesses through ``ctx``. Events are ordered by
(time, destination lane, source lane, sequence number).
"""
from __future__ import annotations

import heapq
from collections import deque

import numpy as np

from .cache import SoftwareCache, cache_touch
from .config import MachineConfig
from .placement import owner_lanes
from .result import LaneCounters, PhaseRecord, SimResult

MAX_PAYLOAD_WORDS = 8

# event kinds
_NEW, _CONT, _ADMIT = 0, 1, 2


class SimulationError(RuntimeError):
    def __init__(self, message, lane=None, task=None, payload=None):
        ctx = []
        if lane is not None:
            ctx.append(f"lane {lane}")
        if task is not None:
            ctx.append(f"task {task}")
        if payload is not None:
            ctx.append(f"payload {payload!r}")
        super().__init__(f"{message} ({', '.join(ctx)})" if ctx else message)
        self.lane = lane
        self.task = task
        self.payload = payload


def _name(handler) -> str:
    return getattr(handler, "__qualname__", repr(handler))


class Context:
    """Handle given to a running task."""

    __slots__ = ("machine", "lane", "node", "start", "charged", "waiting", "src")

    def __init__(self, machine: "Machine", lane: int, start: int, src: int):
        self.machine = machine
        self.lane = lane
        self.node = lane // machine.config.lanes_per_node
        self.start = start
        self.charged = 0
        self.waiting = False
        self.src = src

    @property
    def clock(self) -> int:
        return self.start + self.charged

    def charge(self, cycles: int) -> None:
        if cycles < 0:
            raise SimulationError("negative charge", self.lane)
        self.charged += int(cycles)

    def send(self, to_lane: int, handler, *payload, cost: int = 0) -> int:
        """Message that starts a new task on ``to_lane``; returns its delivery time."""
        m = self.machine
        if len(payload) > MAX_PAYLOAD_WORDS:
            raise SimulationError(f"payload of {len(payload)} words exceeds {MAX_PAYLOAD_WORDS}", self.lane)
        if not 0 <= to_lane < m.lane_count:
            raise SimulationError(f"send to lane {to_lane} out of range", self.lane)
        self.charge(m.cost_send)
        m.counters.messages_sent[self.lane] += 1
        at = self.clock + m.message_latency(self.lane, to_lane)
        m._schedule(at, to_lane, self.lane, _NEW, handler, payload, cost)
        return at

    def spawn(self, handler, *payload, cost: int = 0) -> None:
        """New thread on this lane."""
        self.charge(self.machine.cost_create)
        self.machine._schedule(self.clock, self.lane, self.lane, _NEW, handler, payload, cost)

    def dram_read(self, address_vertex: int, words: int = 1) -> int:
        """Issue one DRAM access; returns the time its response is back."""
        m = self.machine
        if not 1 <= words <= 8:
            raise SimulationError(f"DRAM access of {words} words (must be 1..8)", self.lane)
        self.charge(m.cost_dram)
        m.counters.dram_ops[self.lane] += 1
        return self.clock + m.dram_roundtrip(self.lane, m.owner_of(address_vertex))

    def resume_at(self, at: int, handler, *payload, cost: int = 0) -> None:
        """Continue this thread with ``handler`` at time ``at`` (thread stays blocked)."""
        self.waiting = True
        self.machine._schedule(at, self.lane, self.lane, _CONT, handler, payload, cost)

    def dram(self, address_vertex: int, words: int, then, *payload, cost: int = 0) -> int:
        at = self.dram_read(address_vertex, words)
        self.resume_at(at, then, *payload, cost=cost)
        return at

    def wait(self) -> None:
        """Keep the thread alive after this handler (more responses pending)."""
        self.waiting = True

    def count_edges(self, k: int) -> None:
        self.machine.counters.edges_processed[self.lane] += k

    def cache_touch(self, key: int) -> int:
        outcome, penalty = cache_touch(self.machine.cache(self.lane), key)
        self.charge(penalty)
        return outcome


class Machine:
    def __init__(self, config: MachineConfig, graph=None, seed: int = 0):
        self.config = config
        self.lane_count = config.total_lanes
        self.graph = graph
        self.rng = np.random.default_rng(seed)
        self.vertex_count = None if graph is None else graph.vertex_count
        self._owner = None if graph is None else owner_lanes(np.arange(graph.vertex_count), self.lane_count)
        c = config.costs
        self.cost_send = c["send_message"]
        self.cost_dram = c["dram_issue"]
        self.cost_create = c["thread_create"]
        self.lat_local = config.latency_cycles("local_message_ns")
        self.lat_remote = config.latency_cycles("remote_message_ns")
        self.dram_local = config.latency_cycles("local_dram_roundtrip_ns")
        self.dram_remote = config.latency_cycles("remote_dram_roundtrip_ns")
        self.counters = LaneCounters(self.lane_count)
        self.free = [0] * self.lane_count
        self.threads = [0] * self.lane_count
        self.deferred: dict[int, deque] = {}
        self._caches: dict[int, SoftwareCache] = {}
        self._heap: list = []
        self._seq = 0
        self.now = 0
        self.phases: list[PhaseRecord] = []

    # -- placement / latency ------------------------------------------------
    def owner_of(self, vertex: int) -> int:
        vertex = int(vertex)
        if self._owner is not None:
            if not 0 <= vertex < self.vertex_count:
                raise IndexError(f"vertex {vertex} out of range [0, {self.vertex_count})")
            return int(self._owner[vertex])
        if vertex < 0:
            raise IndexError(f"negative vertex {vertex}")
        return int(owner_lanes([vertex], self.lane_count)[0])

    def node_of(self, lane: int) -> int:
        return lane // self.config.lanes_per_node

    def message_latency(self, a: int, b: int) -> int:
        if a == b:
            return 0
        return self.lat_local if self.node_of(a) == self.node_of(b) else self.lat_remote

    def dram_roundtrip(self, lane: int, owner_lane: int) -> int:
        return self.dram_local if self.node_of(lane) == self.node_of(owner_lane) else self.dram_remote

    def cache(self, lane: int) -> SoftwareCache:
        c = self._caches.get(lane)
        if c is None:
            c = self._caches[lane] = SoftwareCache.for_config(self.config)
        return c

    def flush_caches(self) -> None:
        for c in self._caches.values():
            c.flush()

    # -- scheduling ---------------------------------------------------------
    def _schedule(self, at, dest, src, kind, handler, payload, cost):
        if cost < 0:
            raise SimulationError("negative instruction cost", dest, _name(handler), payload)
        heapq.heappush(self._heap, (int(at), dest, src, self._seq, kind, handler, payload, int(cost)))
        self._seq += 1

    def post(self, lane: int, handler, *payload, at: int | None = None, cost: int = 0) -> None:
        """Inject a task from outside the machine (no send cost)."""
        if not 0 <= lane < self.lane_count:
            raise SimulationError(f"lane {lane} out of range")
        if len(payload) > MAX_PAYLOAD_WORDS:
            raise SimulationError(f"payload of {len(payload)} words exceeds {MAX_PAYLOAD_WORDS}", lane)
        self._schedule(self.now if at is None else at, lane, lane, _NEW, handler, payload, cost)

    def run(self) -> int:
        """Drain the calendar; returns the completion time of the last task."""
        heap = self._heap
        cap = self.config.hw_threads_per_lane
        end = self.now
        cnt = self.counters
        while heap:
            ev = heapq.heappop(heap)
            at, dest, src, _, kind, handler, payload, cost = ev
            if kind == _NEW:
                if self.threads[dest] >= cap:
                    self.deferred.setdefault(dest, deque()).append(ev)
                    continue
                self.threads[dest] += 1
            start = max(at, self.free[dest])
            self.now = start
            ctx = Context(self, dest, start, src)
            ctx.charged = cost
            try:
                handler(ctx, *payload)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(f"handler fault: {exc}", dest, _name(handler), payload) from exc
            finish = ctx.clock
            self.free[dest] = finish
            cnt.busy_cycles[dest] += ctx.charged
            cnt.tasks_run[dest] += 1
            end = max(end, finish)
            if not ctx.waiting:
                self.threads[dest] -= 1
                q = self.deferred.get(dest)
                if q:
                    d = q.popleft()
                    self.threads[dest] += 1
                    self._schedule(finish, dest, d[2], _ADMIT, d[5], d[6], d[7])
        return end

    def run_phase(self, label: str, start, work: int = 0, barrier: bool = False, epilogue=None) -> int:
        """Run one bulk-synchronous phase started by ``start(machine)``; returns its cycles."""
        t0 = max([self.now] + self.free)
        self.now = t0
        start(self)
        end = max(t0, self.run())
        if epilogue is not None:
            for lane in np.flatnonzero(epilogue):
                extra = int(epilogue[lane])
                self.counters.busy_cycles[lane] += extra
                end = max(end, max(self.free[lane], t0) + extra)
        if barrier:
            end += self.config.barrier_cycles()
        self.free = [end] * self.lane_count
        self.now = end
        self.phases.append(PhaseRecord(label, int(work), end - t0))
        return end - t0

    def result(self, meta: dict | None = None) -> SimResult:
        elapsed = max([self.now] + self.free) if (self.phases or self.now) else 0
        return SimResult(int(elapsed), self.config.clock_hz, self.counters, tuple(self.phases), dict(meta or {}))


def run_program(config: MachineConfig, program, graph=None, seed: int = 0, barrier: bool = False,
                meta: dict | None = None) -> SimResult:
    """Simulate ``program``.

    ``program`` is either a callable ``program(machine)`` that posts the initial
    tasks, or a sequence of ``(label, callable)`` phases run back to back.
    """
    m = Machine(config, graph, seed)
    phases = [("main", program)] if callable(program) else list(program)
    for label, fn in phases:
        m.run_phase(label, fn, barrier=barrier)
    return m.result(meta)


# -- parallel-for primitives ------------------------------------------------

def worker_of(units, total: int, workers: int):
    """Worker of each weight unit when ``total`` units are dealt proportionally to ``workers`` workers.

    Unit u belongs to worker floor(workers * u / total), so every worker gets
    total/workers units up to rounding and a half-range of positive weight
    always has at least one worker.
    """
    u = np.asarray(units, dtype=np.int64)
    if total <= 0:
        return np.zeros_like(u)
    return np.minimum(workers * u // total, workers - 1)


class _Job:
    __slots__ = ("body", "workers", "cum", "weights", "split_heavy", "total")

    def __init__(self, body, workers, cum, weights=None, split_heavy=False):
        self.body = body
        self.workers = workers
        self.cum = cum
        self.weights = weights
        self.split_heavy = split_heavy
        self.total = cum[-1]


def _span(job: _Job, lo, hi, elo, ehi):
    """Absolute weight units [a, b) covered by a spawn-tree node."""
    if elo < 0:
        return job.cum[lo], job.cum[hi]
    base = job.cum[lo]
    return base + elo, base + ehi


def _lane(job: _Job, node) -> int:
    a, _ = _span(job, *node)
    w = len(job.workers)
    return int(job.workers[min(int(w * a // job.total), w - 1)]) if job.total > 0 else int(job.workers[0])


def _children(job: _Job, lo, hi, elo, ehi):
    """Split rule shared by both parallel-for flavours; None for a leaf.

    Index ranges are bisected. With ``split_heavy`` a single index whose units
    span several workers is cut at the worker boundary nearest its middle.
    """
    if hi - lo >= 2:
        mid = (lo + hi) // 2
        return (lo, mid, -1, -1), (mid, hi, -1, -1)
    if job.split_heavy:
        if elo < 0:
            elo, ehi = 0, int(job.weights[lo])
        a, b = _span(job, lo, hi, elo, ehi)
        w, t = len(job.workers), job.total
        if b - a >= 2:
            first = w * a // t
            last = w * (b - 1) // t
            if last > first:
                k = (first + last + 1) // 2
                cut = -(-k * t // w) - int(job.cum[lo])
                return (lo, hi, elo, cut), (lo, hi, cut, ehi)
    return None


def _pf_node(ctx: Context, lo, hi, elo, ehi, job: _Job):
    kids = _children(job, lo, hi, elo, ehi)
    if kids is None:
        if job.split_heavy:
            if elo < 0:
                elo, ehi = 0, int(job.weights[lo])
            job.body(ctx, lo, elo, ehi)
        else:
            job.body(ctx, lo)
        return
    create = ctx.machine.cost_create
    for k in kids:
        ctx.charge(create)
        ctx.send(_lane(job, k), _pf_node, *k, job)


def parallel_for(m: Machine, start: int, end: int, body, workers=None, at: int | None = None) -> None:
    """Binary divide-and-conquer spawn of ``body(ctx, i)`` for i in [start, end).

    Workers (lanes) are divided in proportion to the index counts of each half;
    a half with a single worker keeps splitting on that worker.
    """
    if end < start:
        raise ValueError("range_end < range_start")
    if end == start:
        return
    workers = np.arange(m.lane_count) if workers is None else np.asarray(workers)
    offset_body = (lambda ctx, i: body(ctx, i + start)) if start else body
    job = _Job(offset_body, workers, np.arange(end - start + 1, dtype=np.int64))
    m.post(int(workers[0]), _pf_node, 0, end - start, -1, -1, job, at=at)


def load_balanced_parallel_for(m: Machine, start: int, end: int, weights, body, workers=None,
                               split_heavy: bool = False, at: int | None = None) -> None:
    """Like ``parallel_for`` but workers follow the weight of each half.

    ``weights[i - start]`` estimates the work of index i. With ``split_heavy``
    the weights must be integers and an index left with several workers is
    itself bisected; ``body(ctx, i, lo, hi)`` then handles part [lo, hi) of it.
    """
    if end < start:
        raise ValueError("range_end < range_start")
    if end == start:
        return
    w = np.asarray(weights)
    if w.shape[0] != end - start:
        raise ValueError("weights must have one entry per index")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if split_heavy:
        w = w.astype(np.int64)
    if w.sum() <= 0:
        # nothing to balance on
        if split_heavy:
            parallel_for(m, start, end, lambda ctx, i: body(ctx, i, 0, 0), workers, at)
        else:
            parallel_for(m, start, end, body, workers, at)
        return
    workers = np.arange(m.lane_count) if workers is None else np.asarray(workers)
    cum = np.concatenate([[0], np.cumsum(w)])
    # indices of the job are relative to start
    offset_body = (lambda ctx, i, lo, hi: body(ctx, i + start, lo, hi)) if split_heavy else \
        (lambda ctx, i: body(ctx, i + start))
    job = _Job(offset_body, workers, cum, w, split_heavy)
    m.post(int(workers[0]), _pf_node, 0, end - start, -1, -1, job, at=at)


def balanced_assignment(weights, worker_count: int, split_heavy: bool = False) -> list[tuple]:
    """Leaves of the load-balanced spawn tree as (index, lo, hi, worker), without simulating."""
    w = np.asarray(weights)
    n = w.shape[0]
    if n == 0:
        return []
    if w.sum() <= 0:
        # same fallback as load_balanced_parallel_for: plain split, empty parts
        leaves = balanced_assignment(np.ones(n, dtype=np.int64), worker_count)
        return [(i, 0, 0, k) if split_heavy else (i, lo, hi, k) for i, lo, hi, k in leaves]
    if split_heavy:
        w = w.astype(np.int64)
    job = _Job(None, np.arange(worker_count), np.concatenate([[0], np.cumsum(w)]), w, split_heavy)
    out = []
    stack = [(0, n, -1, -1)]
    while stack:
        node = stack.pop()
        kids = _children(job, *node)
        if kids is None:
            lo, _, elo, ehi = node
            worker = _lane(job, node)
            if split_heavy and elo < 0:
                elo, ehi = 0, int(w[lo])
            out.append((lo, elo, ehi, worker))
        else:
            stack.append(kids[1])
            stack.append(kids[0])
    return out
