"""Nanosecond-stepped interconnect model: FIFO link queues, per-ns link byte budgets, minimal routing with adaptive reroute."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numba as nb
import numpy as np

from .topology import RoutingTable, Topology

MESSAGE_BYTES = 34


@dataclass(frozen=True)
class NetConfig:
    duration_ns: int = 5000
    injection_fraction: float | None = None  # None = max rate; else fraction of node bandwidth
    node_bandwidth: float = 4400.0  # bytes/ns over both node links
    link_bandwidth: float | None = None  # bytes/ns per router link; None = topology value
    message_bytes: int = MESSAGE_BYTES
    queue_sample_period_ns: int = 100
    seed: int = 0
    hop_cap: int = 16
    reroute_samples: int = 5

    def validate(self, t: Topology | None = None) -> None:
        if self.duration_ns < 1 or self.queue_sample_period_ns < 1 or self.message_bytes < 1:
            raise ValueError("duration, sample period and message size must be positive")
        if self.node_bandwidth <= 0:
            raise ValueError("node_bandwidth must be positive")
        if self.injection_fraction is not None and not 0.0 <= self.injection_fraction <= 1.0:
            raise ValueError("injection_fraction must be in [0, 1]")
        if self.node_bandwidth / 2 < self.message_bytes:
            raise ValueError("each node link must carry at least one message per ns")
        bw = self.link_bandwidth if self.link_bandwidth is not None else (t.link_bandwidth if t else None)
        if bw is not None and bw < self.message_bytes:
            raise ValueError("link bandwidth below one message per ns")
        if self.hop_cap < 2 or self.reroute_samples < 0:
            raise ValueError("hop_cap must be >= 2 and reroute_samples >= 0")

    @property
    def max_rate(self) -> bool:
        return self.injection_fraction is None

    def as_dict(self) -> dict:
        return asdict(self)


@nb.njit(cache=True)
def _push(slot_head, slot_tail, slot_cnt, nxt, s, m):
    nxt[m] = -1
    if slot_tail[s] < 0:
        slot_head[s] = m
    else:
        nxt[slot_tail[s]] = m
    slot_tail[s] = m
    slot_cnt[s] += 1


@nb.njit(cache=True)
def _kernel(indptr, nbrs, attach, dist, nexthop, duration, H, mb, budget, per_link, frac_bytes,
            period, seed, hop_cap, samples_k, cap):
    np.random.seed(seed)
    R = indptr.size - 1
    N = attach.shape[0]
    L = nbrs.size
    m_dst = np.empty(cap, np.int32)
    m_dr = np.empty(cap, np.int32)
    m_at = np.empty(cap, np.int32)
    m_inj = np.empty(cap, np.int32)
    m_hops = np.empty(cap, np.int32)
    m_noload = np.empty(cap, np.int32)
    m_deliv = np.full(cap, -1, np.int32)
    nxt = np.full(cap, -1, np.int64)
    qhead = np.full(L, -1, np.int64)
    qtail = np.full(L, -1, np.int64)
    qlen = np.zeros(L, np.int64)
    used = np.zeros(L, np.int64)
    slot_head = np.full(H, -1, np.int64)
    slot_tail = np.full(H, -1, np.int64)
    slot_cnt = np.zeros(H, np.int64)
    acc = np.zeros(N, np.float64)
    alt = np.zeros(N, np.int64)
    nsamp = duration // period
    s_t = np.zeros(nsamp, np.int64)
    s_maxq = np.zeros(nsamp, np.int64)
    s_frac = np.zeros(nsamp, np.float64)
    s_inj = np.zeros(nsamp, np.int64)
    s_del = np.zeros(nsamp, np.int64)
    s_queued = np.zeros(nsamp, np.int64)
    s_transit = np.zeros(nsamp, np.int64)
    cand = np.empty(64, np.int64)
    mins = np.empty(64, np.int64)
    injected = 0
    delivered = 0
    rerouted = 0
    queued_events = 0
    cap_hits = 0
    max_used = 0
    si = 0
    for t in range(duration):
        s = t % H
        inc = slot_head[s]
        slot_head[s] = -1
        slot_tail[s] = -1
        slot_cnt[s] = 0
        used[:] = 0
        # 1. nodes inject; new messages reach their first router after one hop
        if N > 1:
            for node in range(N):
                if frac_bytes < 0:
                    count = 2 * per_link
                else:
                    acc[node] += frac_bytes
                    count = 0
                    while acc[node] >= mb and count < 2 * per_link:
                        acc[node] -= mb
                        count += 1
                for j in range(count):
                    if frac_bytes < 0:
                        link = j // per_link
                    else:
                        link = alt[node]
                        alt[node] ^= 1
                    m = injected
                    injected += 1
                    src_r = attach[node, link]
                    d = np.random.randint(0, N - 1)
                    if d >= node:
                        d += 1
                    a = attach[d, 0]
                    b = attach[d, 1]
                    dr = a if dist[src_r, a] <= dist[src_r, b] else b
                    m_dst[m] = d
                    m_dr[m] = dr
                    m_at[m] = src_r
                    m_inj[m] = t
                    m_hops[m] = 1
                    m_noload[m] = (dist[src_r, dr] + 2) * H
                    _push(slot_head, slot_tail, slot_cnt, nxt, s, m)
        # 2. routers drain queued messages within this ns's link budget
        for k in range(L):
            while qhead[k] >= 0 and used[k] + mb <= budget:
                m = qhead[k]
                qhead[k] = nxt[m]
                if qhead[k] < 0:
                    qtail[k] = -1
                qlen[k] -= 1
                used[k] += mb
                m_at[m] = nbrs[k]
                m_hops[m] += 1
                _push(slot_head, slot_tail, slot_cnt, nxt, s, m)
            if used[k] > max_used:
                max_used = used[k]
        # 3. routers handle messages arriving this ns
        m = inc
        while m >= 0:
            following = nxt[m]
            at = m_at[m]
            if at < 0:
                m_deliv[m] = t
                delivered += 1
            elif at == m_dr[m]:
                # node-bound links queue regardless of capacity, so the message leaves now
                m_at[m] = -(m_dst[m] + 1)
                m_hops[m] += 1
                _push(slot_head, slot_tail, slot_cnt, nxt, s, m)
            else:
                r = at
                d = m_dr[m]
                lo = indptr[r]
                deg = indptr[r + 1] - lo
                bits = nexthop[r, d]
                nm = 0
                nc = 0
                for i in range(deg):
                    if (bits >> np.uint64(i)) & np.uint64(1):
                        mins[nm] = i
                        nm += 1
                    else:
                        cand[nc] = i
                        nc += 1
                off = np.random.randint(0, nm)
                chosen = -1
                shortest = -1
                for j in range(nm):
                    k = lo + mins[(off + j) % nm]
                    if used[k] + mb <= budget:
                        chosen = k
                        break
                    if shortest < 0 or qlen[k] < qlen[shortest]:
                        shortest = k
                if chosen < 0 and samples_k > 0 and nc > 0:
                    # adaptive reroute: sample distinct non-minimal neighbors
                    take = samples_k if samples_k < nc else nc
                    capped = False
                    for j in range(take):
                        p = j + np.random.randint(0, nc - j)
                        tmp = cand[j]
                        cand[j] = cand[p]
                        cand[p] = tmp
                        k = lo + cand[j]
                        if m_hops[m] + 1 + dist[nbrs[k], d] + 1 > hop_cap:
                            capped = True
                            continue
                        if used[k] + mb <= budget:
                            chosen = k
                            rerouted += 1
                            break
                    if chosen < 0 and capped:
                        cap_hits += 1
                if chosen >= 0:
                    used[chosen] += mb
                    if used[chosen] > max_used:
                        max_used = used[chosen]
                    m_at[m] = nbrs[chosen]
                    m_hops[m] += 1
                    _push(slot_head, slot_tail, slot_cnt, nxt, s, m)
                else:
                    k = shortest
                    nxt[m] = -1
                    if qtail[k] < 0:
                        qhead[k] = m
                    else:
                        nxt[qtail[k]] = m
                    qtail[k] = m
                    qlen[k] += 1
                    queued_events += 1
            m = following
        if (t + 1) % period == 0 and si < nsamp:
            mq = 0
            ne = 0
            tot = 0
            for k in range(L):
                if qlen[k] > mq:
                    mq = qlen[k]
                if qlen[k] > 0:
                    ne += 1
                tot += qlen[k]
            tr = 0
            for j in range(H):
                tr += slot_cnt[j]
            s_t[si] = t + 1
            s_maxq[si] = mq * mb
            s_frac[si] = ne / L if L > 0 else 0.0
            s_inj[si] = injected
            s_del[si] = delivered
            s_queued[si] = tot
            s_transit[si] = tr
            si += 1
    counters = np.array([injected, delivered, rerouted, queued_events, cap_hits, max_used], np.int64)
    return (s_t, s_maxq, s_frac, s_inj, s_del, s_queued, s_transit, counters,
            m_inj[:injected], m_deliv[:injected], m_hops[:injected], m_noload[:injected])


def message_capacity(t: Topology, cfg: NetConfig) -> int:
    per_link = int(cfg.node_bandwidth / 2 // cfg.message_bytes)
    if cfg.max_rate:
        return t.node_count * 2 * per_link * cfg.duration_ns
    per_ns = min(cfg.injection_fraction * cfg.node_bandwidth / cfg.message_bytes, 2 * per_link)
    return int(t.node_count * (np.floor(per_ns * cfg.duration_ns) + 1))


def simulate(t: Topology, routes: RoutingTable, cfg: NetConfig = NetConfig()):
    """Run ``cfg.duration_ns`` nanoseconds of uniform random traffic; returns NetStats."""
    from .stats import NetStats

    cfg.validate(t)
    bw = cfg.link_bandwidth if cfg.link_bandwidth is not None else t.link_bandwidth
    if t.radix > 64:
        raise ValueError("radix above 64 not supported")
    per_link = int(cfg.node_bandwidth / 2 // cfg.message_bytes)
    frac = -1.0 if cfg.max_rate else float(cfg.injection_fraction * cfg.node_bandwidth)
    out = _kernel(t.indptr.astype(np.int64), t.neighbors.astype(np.int64), t.attach.astype(np.int64),
                  routes.dist.astype(np.int64), routes.nexthop, int(cfg.duration_ns), int(t.hop_latency_ns),
                  int(cfg.message_bytes), int(bw), per_link, frac, int(cfg.queue_sample_period_ns),
                  int(cfg.seed) % 2**32, int(cfg.hop_cap), int(cfg.reroute_samples),
                  max(message_capacity(t, cfg), 1))
    s_t, s_maxq, s_frac, s_inj, s_del, s_queued, s_transit, c, inj, deliv, hops, noload = out
    done = deliv >= 0
    return NetStats(
        sample_t=s_t, max_queue_bytes=s_maxq, frac_nonempty=s_frac,
        injected_series=s_inj, delivered_series=s_del, queued_series=s_queued, transit_series=s_transit,
        latencies=(deliv[done] - inj[done]).astype(np.int64), noload=noload[done].astype(np.int64),
        hops=hops[done].astype(np.int64), injected=int(c[0]), delivered=int(c[1]), rerouted=int(c[2]),
        queued_events=int(c[3]), hop_cap_hits=int(c[4]), max_link_bytes_per_ns=int(c[5]),
        link_bandwidth=float(bw), hop_latency_ns=int(t.hop_latency_ns), diameter=routes.diameter,
        config=cfg.as_dict(), topology_source=t.source,
    )
