"""Compiled simulation of one bulk-synchronous kernel phase.

A phase is a spawn tree that hands work items to lanes. Every item is a
thread that reads its adjacency chunk from DRAM and then either

* push: sends one update message per edge to the neighbor's owner lane, or
* pull: reads each neighbor's value from DRAM, combines the responses and
  finally sends flag messages to some of its neighbors.

The event rules are the same as in ``engine.Machine`` (``replay_phase``
re-runs a descriptor there for cross-checking) but run under numba.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .cache import cache_slot
from .config import MachineConfig
from .engine import Machine

SPAWN, ITEM, SCAN, ACT, RESP, FLAG = 0, 1, 2, 3, 4, 5
_ADMITTED = 16

# indices into the packed cost vector
(_C_SEND, _C_DRAM, _C_CREATE, _C_YIELD, _C_DEALLOC, _H_ITEM, _H_UPDATE, _H_FINAL, _H_FLAG,
 _L_MSG, _R_MSG, _L_DRAM, _R_DRAM, _LPN, _CAP, _PENALTY) = range(16)


def cost_vector(config: MachineConfig) -> np.ndarray:
    c, h = config.costs, config.handlers
    return np.array([
        c["send_message"], c["dram_issue"], c["thread_create"], c["thread_yield"], c["thread_dealloc"],
        h["item"], h["update"], h["finalize"], h["flag"],
        config.latency_cycles("local_message_ns"), config.latency_cycles("remote_message_ns"),
        config.latency_cycles("local_dram_roundtrip_ns"), config.latency_cycles("remote_dram_roundtrip_ns"),
        config.lanes_per_node, config.hw_threads_per_lane,
        config.latency_cycles("local_dram_roundtrip_ns"),
    ], dtype=np.int64)


@dataclass(eq=False)
class PhaseDescriptor:
    label: str
    work: int
    item_v: np.ndarray
    item_lane: np.ndarray
    item_elo: np.ndarray
    item_cnt: np.ndarray
    item_nflag: np.ndarray
    node_lane: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_lo: np.ndarray
    node_hi: np.ndarray
    leaf_items: np.ndarray
    pull: bool = False
    use_cache: bool = False
    epilogue: np.ndarray | None = None
    extra_cycles: int = 0
    mode: str = "plain"
    # balanced mode: original item of each part and the part's offset in it
    part_of: np.ndarray | None = None
    part_lo: np.ndarray | None = None
    orig_cnt: np.ndarray | None = None

    @property
    def item_count(self) -> int:
        return self.item_v.shape[0]


# -- spawn tree --------------------------------------------------------------

@nb.njit(cache=True)
def _build_tree(cum, weights, n, workers, split_heavy):
    """Preorder spawn tree; leaves carry (index, part lo, part hi).

    Weight unit u runs on worker workers*u // total and a node runs on the
    worker of its first unit. A single index spanning several workers is cut
    at the worker boundary nearest its middle.
    """
    total = cum[n]
    cap = 2 * (n + workers) + 2
    lane = np.empty(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    leaf_i = np.full(cap, -1, np.int64)
    leaf_lo = np.full(cap, -1, np.int64)
    leaf_hi = np.full(cap, -1, np.int64)
    # stack rows: node id, lo, hi, elo, ehi
    st = np.empty((cap, 5), np.int64)
    st[0, 0] = 0
    st[0, 1] = 0
    st[0, 2] = n
    st[0, 3] = -1
    st[0, 4] = -1
    sp = 1
    count = 1
    while sp > 0:
        sp -= 1
        nid, lo, hi, elo, ehi = st[sp, 0], st[sp, 1], st[sp, 2], st[sp, 3], st[sp, 4]
        if elo < 0:
            a = cum[lo]
            b = cum[hi]
        else:
            a = cum[lo] + elo
            b = cum[lo] + ehi
        lane[nid] = min(workers * a // total, workers - 1) if total > 0 else 0
        kid = False
        if hi - lo >= 2:
            mid = (lo + hi) // 2
            a0, a1, a2, a3 = lo, mid, -1, -1
            b0, b1, b2, b3 = mid, hi, -1, -1
            kid = True
        elif split_heavy and b - a >= 2:
            if elo < 0:
                elo = 0
                ehi = weights[lo]
            first = workers * a // total
            last = workers * (b - 1) // total
            if last > first:
                k = (first + last + 1) // 2
                cut = -(-k * total // workers) - cum[lo]
                a0, a1, a2, a3 = lo, hi, elo, cut
                b0, b1, b2, b3 = lo, hi, cut, ehi
                kid = True
        if not kid:
            if split_heavy and elo < 0:
                elo = 0
                ehi = weights[lo]
            leaf_i[nid] = lo
            leaf_lo[nid] = elo
            leaf_hi[nid] = ehi
            continue
        li = count
        ri = count + 1
        count += 2
        left[nid] = li
        right[nid] = ri
        # right first so the left child is expanded first
        st[sp, 0] = ri
        st[sp, 1] = b0
        st[sp, 2] = b1
        st[sp, 3] = b2
        st[sp, 4] = b3
        sp += 1
        st[sp, 0] = li
        st[sp, 1] = a0
        st[sp, 2] = a1
        st[sp, 3] = a2
        st[sp, 4] = a3
        sp += 1
    return lane[:count], left[:count], right[:count], leaf_i[:count], leaf_lo[:count], leaf_hi[:count]


def spawn_tree(weights, worker_count: int, split_heavy: bool = False):
    w = np.ascontiguousarray(weights, dtype=np.int64)
    n = w.shape[0]
    if n == 0:
        raise ValueError("spawn tree over an empty range")
    if w.sum() <= 0:
        w = np.ones(n, dtype=np.int64)
        split_heavy = False
    cum = np.concatenate([[0], np.cumsum(w)]).astype(np.int64)
    return _build_tree(cum, w, n, int(worker_count), bool(split_heavy))


def plain_phase(label, work, item_v, item_elo, item_cnt, owner, lane_count, item_nflag=None,
                pull=False, use_cache=False, epilogue=None, extra_cycles=0) -> PhaseDescriptor:
    """Items run on the owner lane of their vertex; the spawn tree covers all lanes."""
    item_v = np.asarray(item_v, dtype=np.int64)
    lanes = owner[item_v]
    order = np.argsort(lanes, kind="stable")
    item_v = item_v[order]
    lanes = lanes[order]
    elo = np.asarray(item_elo, dtype=np.int64)[order]
    cnt = np.asarray(item_cnt, dtype=np.int64)[order]
    nflag = np.zeros_like(cnt) if item_nflag is None else np.asarray(item_nflag, dtype=np.int64)[order]
    bounds = np.searchsorted(lanes, np.arange(lane_count + 1))
    t_lane, t_left, t_right, t_leaf, _, _ = spawn_tree(np.ones(lane_count, np.int64), lane_count)
    leaf = t_leaf >= 0
    node_lo = np.where(leaf, bounds[np.maximum(t_leaf, 0)], 0)
    node_hi = np.where(leaf, bounds[np.maximum(t_leaf, 0) + 1], 0)
    return PhaseDescriptor(label, int(work), item_v, lanes, elo, cnt, nflag, t_lane, t_left, t_right,
                           node_lo, node_hi, np.arange(item_v.shape[0], dtype=np.int64), pull, use_cache,
                           epilogue, int(extra_cycles))


def balanced_phase(label, work, item_v, item_elo, item_cnt, lane_count,
                   epilogue=None, extra_cycles=0) -> PhaseDescriptor:
    """Push items spread over all lanes by the load-balanced spawn tree, weights = edge counts.

    An item left with several workers has its edge range divided among them.
    """
    item_v = np.asarray(item_v, dtype=np.int64)
    elo = np.asarray(item_elo, dtype=np.int64)
    cnt = np.asarray(item_cnt, dtype=np.int64)
    t_lane, t_left, t_right, t_leaf, t_lo, t_hi = spawn_tree(cnt, lane_count, split_heavy=True)
    leaves = np.flatnonzero(t_leaf >= 0)
    parts = t_leaf[leaves]
    p_lo = np.where(t_lo[leaves] < 0, 0, t_lo[leaves])
    p_hi = np.where(t_lo[leaves] < 0, cnt[parts], t_hi[leaves])
    node_lo = np.zeros_like(t_lane)
    node_hi = np.zeros_like(t_lane)
    node_lo[leaves] = np.arange(leaves.shape[0])
    node_hi[leaves] = node_lo[leaves] + 1
    return PhaseDescriptor(label, int(work), item_v[parts], t_lane[leaves], elo[parts] + p_lo, p_hi - p_lo,
                           np.zeros(leaves.shape[0], np.int64), t_lane, t_left, t_right, node_lo, node_hi,
                           np.arange(leaves.shape[0], dtype=np.int64), False, False, epilogue,
                           int(extra_cycles), "balanced", parts, p_lo, cnt)


# -- event loop ----------------------------------------------------------------

@nb.njit(cache=True, inline="always")
def _less(h, i, j):
    if h[i, 0] != h[j, 0]:
        return h[i, 0] < h[j, 0]
    if h[i, 1] != h[j, 1]:
        return h[i, 1] < h[j, 1]
    return h[i, 2] < h[j, 2]


@nb.njit(cache=True)
def _push(h, size, t, dest, src, seq, kind, a, b):
    if size == h.shape[0]:
        g = np.empty((2 * h.shape[0], 6), np.int64)
        g[:size] = h[:size]
        h = g
    i = size
    h[i, 0] = t
    h[i, 1] = (dest << 24) | src
    h[i, 2] = seq
    h[i, 3] = kind
    h[i, 4] = a
    h[i, 5] = b
    while i > 0:
        p = (i - 1) >> 1
        if _less(h, i, p):
            for c in range(6):
                tmp = h[i, c]
                h[i, c] = h[p, c]
                h[p, c] = tmp
            i = p
        else:
            break
    return h


@nb.njit(cache=True)
def _pop(h, size, out):
    for c in range(6):
        out[c] = h[0, c]
    size -= 1
    if size > 0:
        for c in range(6):
            h[0, c] = h[size, c]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= size:
                break
            m = l
            r = l + 1
            if r < size and _less(h, r, l):
                m = r
            if _less(h, m, i):
                for c in range(6):
                    tmp = h[i, c]
                    h[i, c] = h[m, c]
                    h[m, c] = tmp
                i = m
            else:
                break
    return size


@nb.njit(cache=True, inline="always")
def _msg_lat(a, b, cp):
    if a == b:
        return 0
    if a // cp[_LPN] == b // cp[_LPN]:
        return cp[_L_MSG]
    return cp[_R_MSG]


@nb.njit(cache=True, inline="always")
def _dram_rt(a, b, cp):
    if a // cp[_LPN] == b // cp[_LPN]:
        return cp[_L_DRAM]
    return cp[_R_DRAM]


@nb.njit(cache=True)
def _simulate(lanes, cp, node_lane, node_left, node_right, node_lo, node_hi, leaf_items,
              item_v, item_lane, item_elo, item_cnt, item_nflag, tgt, owner, pull, use_cache,
              cslot, n_slots, epilogue, c_tasks, c_edges, c_msgs, c_dram, c_busy):
    free = np.zeros(lanes, np.int64)
    threads = np.zeros(lanes, np.int64)
    join = item_cnt.copy()
    tags = np.full(max(n_slots, 1), -1, np.int64)
    dhead = np.full(lanes, -1, np.int64)
    dtail = np.full(lanes, -1, np.int64)
    dpool = np.empty((1024, 5), np.int64)  # kind, a, b, src, next
    dused = 0
    h = np.empty((1 << 12, 6), np.int64)
    size = 0
    seq = 0
    ev = np.empty(6, np.int64)
    cap = cp[_CAP]
    end = 0
    if node_lane.shape[0] > 0:
        root = node_lane[0]
        h = _push(h, size, 0, root, root, seq, SPAWN, 0, 0)
        size += 1
        seq += 1
    while size > 0:
        size = _pop(h, size, ev)
        t = ev[0]
        dest = ev[1] >> 24
        src = ev[1] & 0xFFFFFF
        kind = ev[3]
        a = ev[4]
        b = ev[5]
        admitted = kind >= _ADMITTED
        if admitted:
            kind -= _ADMITTED
        if (kind == SPAWN or kind == ITEM or kind == ACT or kind == FLAG) and not admitted:
            if threads[dest] >= cap:
                if dused == dpool.shape[0]:
                    g = np.empty((2 * dused, 5), np.int64)
                    g[:dused] = dpool[:dused]
                    dpool = g
                dpool[dused, 0] = kind
                dpool[dused, 1] = a
                dpool[dused, 2] = b
                dpool[dused, 3] = src
                dpool[dused, 4] = -1
                if dtail[dest] >= 0:
                    dpool[dtail[dest], 4] = dused
                else:
                    dhead[dest] = dused
                dtail[dest] = dused
                dused += 1
                continue
            threads[dest] += 1
        s = t if t > free[dest] else free[dest]
        c = 0
        finished = True
        if kind == SPAWN:
            lch = node_left[a]
            if lch >= 0:
                rch = node_right[a]
                c += cp[_C_CREATE] + cp[_C_SEND]
                ll = node_lane[lch]
                h = _push(h, size, s + c + _msg_lat(dest, ll, cp), ll, dest, seq, SPAWN, lch, 0)
                size += 1
                seq += 1
                c += cp[_C_CREATE] + cp[_C_SEND]
                rl = node_lane[rch]
                h = _push(h, size, s + c + _msg_lat(dest, rl, cp), rl, dest, seq, SPAWN, rch, 0)
                size += 1
                seq += 1
                c_msgs[dest] += 2
            else:
                for k in range(node_lo[a], node_hi[a]):
                    c += cp[_C_CREATE]
                    h = _push(h, size, s + c, dest, dest, seq, ITEM, leaf_items[k], 0)
                    size += 1
                    seq += 1
        elif kind == ITEM:
            c += cp[_H_ITEM]
            cnt = item_cnt[a]
            if cnt > 0:
                nreads = (cnt + 7) // 8
                c += nreads * cp[_C_DRAM]
                c_dram[dest] += nreads
                rt = _dram_rt(dest, owner[item_v[a]], cp)
                h = _push(h, size, s + c + rt, dest, dest, seq, SCAN, a, 0)
                size += 1
                seq += 1
                c += cp[_C_YIELD]
                finished = False
            else:
                if pull:
                    c += cp[_H_FINAL]
                c += cp[_C_DEALLOC]
        elif kind == SCAN:
            cnt = item_cnt[a]
            lo = item_elo[a]
            c_edges[dest] += cnt
            for j in range(lo, lo + cnt):
                u = tgt[j]
                ou = owner[u]
                if pull:
                    c += cp[_C_DRAM]
                    h = _push(h, size, s + c + _dram_rt(dest, ou, cp), dest, dest, seq, RESP, a, u)
                else:
                    c += cp[_C_SEND]
                    h = _push(h, size, s + c + _msg_lat(dest, ou, cp), ou, dest, seq, ACT, a, u)
                size += 1
                seq += 1
            if pull:
                c_dram[dest] += cnt
                c += cp[_C_YIELD]
                finished = False
            else:
                c_msgs[dest] += cnt
                c += cp[_C_DEALLOC]
        elif kind == ACT:
            c += cp[_H_UPDATE]
            if use_cache:
                sl = cslot[b]
                tag = tags[sl]
                if tag != b:
                    if tag >= 0:
                        c += cp[_PENALTY]
                    tags[sl] = b
        elif kind == RESP:
            c += cp[_H_UPDATE]
            join[a] -= 1
            if join[a] == 0:
                c += cp[_H_FINAL]
                lo = item_elo[a]
                for j in range(lo, lo + item_nflag[a]):
                    u = tgt[j]
                    ou = owner[u]
                    c += cp[_C_SEND]
                    h = _push(h, size, s + c + _msg_lat(dest, ou, cp), ou, dest, seq, FLAG, a, u)
                    size += 1
                    seq += 1
                c_msgs[dest] += item_nflag[a]
                c += cp[_C_DEALLOC]
            else:
                finished = False
        else:  # FLAG
            c += cp[_H_FLAG]
        e = s + c
        free[dest] = e
        c_busy[dest] += c
        c_tasks[dest] += 1
        if e > end:
            end = e
        if finished:
            threads[dest] -= 1
            d = dhead[dest]
            if d >= 0:
                dhead[dest] = dpool[d, 4]
                if dhead[dest] < 0:
                    dtail[dest] = -1
                threads[dest] += 1
                h = _push(h, size, e, dest, dpool[d, 3], seq, dpool[d, 0] + _ADMITTED, dpool[d, 1], dpool[d, 2])
                size += 1
                seq += 1
    for l in range(lanes):
        x = epilogue[l]
        if x > 0:
            c_busy[l] += x
            if free[l] + x > end:
                end = free[l] + x
    return end


class PhaseEngine:
    """Per-graph state shared by all phases of one kernel run."""

    def __init__(self, config: MachineConfig, tgt: np.ndarray, owner: np.ndarray, counters):
        self.config = config
        self.lanes = config.total_lanes
        self.cp = cost_vector(config)
        self.tgt = np.ascontiguousarray(tgt, dtype=np.int64)
        self.owner = np.ascontiguousarray(owner, dtype=np.int64)
        self.counters = counters
        self._cslot = None
        self._n_slots = 0
        self._no_epi = np.zeros(self.lanes, np.int64)

    def _cache_slots(self):
        if self._cslot is None:
            cap = self.config.cache_entries
            v = np.arange(self.owner.shape[0], dtype=np.int64)
            key = self.owner * cap + cache_slot(v, cap)
            _, inv = np.unique(key, return_inverse=True)
            self._cslot = inv.astype(np.int64).ravel()
            self._n_slots = int(inv.max(initial=-1)) + 1
        return self._cslot, self._n_slots

    def run(self, d: PhaseDescriptor) -> int:
        """Simulated cycles of phase ``d`` (without the closing barrier)."""
        if d.use_cache:
            cslot, n_slots = self._cache_slots()
        else:
            cslot, n_slots = np.zeros(1, np.int64), 0
        epi = self._no_epi if d.epilogue is None else np.ascontiguousarray(d.epilogue, dtype=np.int64)
        c = self.counters
        return int(_simulate(
            self.lanes, self.cp, d.node_lane, d.node_left, d.node_right, d.node_lo, d.node_hi,
            d.leaf_items, d.item_v, d.item_lane, d.item_elo, d.item_cnt, d.item_nflag, self.tgt,
            self.owner, bool(d.pull), bool(d.use_cache), cslot, n_slots, epi,
            c.tasks_run, c.edges_processed, c.messages_sent, c.dram_ops, c.busy_cycles)) + d.extra_cycles


# -- reference replay on the general engine -----------------------------------

def replay_phase(config: MachineConfig, d: PhaseDescriptor, tgt, owner) -> tuple[int, Machine]:
    """Run descriptor ``d`` on ``engine.Machine`` through its parallel-for primitives."""
    from .engine import load_balanced_parallel_for, parallel_for

    m = Machine(config)
    m._owner = np.asarray(owner, dtype=np.int64)
    m.vertex_count = m._owner.shape[0]
    h = config.handlers
    cs = config.costs
    join = d.item_cnt.copy()
    tgt = np.asarray(tgt)

    def act(ctx, u):
        ctx.charge(h["update"])
        if d.use_cache:
            ctx.cache_touch(u)

    def flag(ctx, u):
        ctx.charge(h["flag"])

    def resp(ctx, i):
        ctx.charge(h["update"])
        join[i] -= 1
        if join[i] == 0:
            ctx.charge(h["finalize"])
            lo = int(d.item_elo[i])
            for u in tgt[lo:lo + d.item_nflag[i]]:
                ctx.send(m.owner_of(u), flag, int(u))
            ctx.charge(cs["thread_dealloc"])
        else:
            ctx.wait()

    def scan(ctx, i):
        cnt = int(d.item_cnt[i])
        lo = int(d.item_elo[i])
        ctx.count_edges(cnt)
        for u in tgt[lo:lo + cnt]:
            if d.pull:
                ctx.resume_at(ctx.dram_read(int(u), 1), resp, i)
            else:
                ctx.send(m.owner_of(u), act, int(u))
        ctx.charge(cs["thread_yield"] if d.pull else cs["thread_dealloc"])

    def item(ctx, i):
        ctx.charge(h["item"])
        cnt = int(d.item_cnt[i])
        if cnt > 0:
            at = 0
            for r in range((cnt + 7) // 8):
                at = ctx.dram_read(int(d.item_v[i]), min(8, cnt - 8 * r))
            # reads overlap; the thread resumes when the last one is back
            ctx.resume_at(at, scan, i)
            ctx.charge(cs["thread_yield"])
        else:
            if d.pull:
                ctx.charge(h["finalize"])
            ctx.charge(cs["thread_dealloc"])

    if d.mode == "balanced":
        part_index = {(int(o), int(lo)): k for k, (o, lo) in enumerate(zip(d.part_of, d.part_lo))}

        def start(mach):
            def body(ctx, i, lo, hi):
                ctx.spawn(item, part_index[(i, lo)])
            load_balanced_parallel_for(mach, 0, d.orig_cnt.shape[0], d.orig_cnt, body,
                                       split_heavy=True, at=0)
    else:
        bounds = np.searchsorted(d.item_lane, np.arange(config.total_lanes + 1))

        def start(mach):
            def lane_body(ctx, lane):
                for i in range(bounds[lane], bounds[lane + 1]):
                    ctx.spawn(item, i)
            parallel_for(mach, 0, config.total_lanes, lane_body, at=0)

    m.run_phase(d.label, start, d.work, epilogue=d.epilogue)
    return m.phases[-1].cycles + d.extra_cycles, m
