"""Queue and latency statistics of a network run, plus tabular reports."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

QUEUE_COLUMNS = ("t_ns", "max_queue_bytes", "frac_nonempty")
CCDF_COLUMNS = ("latency_ns", "ccdf")


def percentile(values, q: float) -> float:
    """Nearest-rank percentile; NaN when empty."""
    v = np.asarray(values)
    if v.size == 0:
        return float("nan")
    return float(np.percentile(v, q, method="inverted_cdf"))


def ccdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values and the fraction of samples strictly above each."""
    v = np.sort(np.asarray(values))
    if v.size == 0:
        return v, np.empty(0)
    xs, counts = np.unique(v, return_counts=True)
    above = v.size - np.cumsum(counts)
    return xs, above / v.size


@dataclass
class NetStats:
    sample_t: np.ndarray
    max_queue_bytes: np.ndarray
    frac_nonempty: np.ndarray
    injected_series: np.ndarray
    delivered_series: np.ndarray
    queued_series: np.ndarray
    transit_series: np.ndarray
    latencies: np.ndarray
    noload: np.ndarray
    hops: np.ndarray
    injected: int = 0
    delivered: int = 0
    rerouted: int = 0
    queued_events: int = 0
    hop_cap_hits: int = 0
    max_link_bytes_per_ns: int = 0
    link_bandwidth: float = 0.0
    hop_latency_ns: int = 100
    diameter: int = 0
    config: dict = field(default_factory=dict)
    topology_source: str = ""

    @property
    def in_flight(self) -> int:
        return self.injected - self.delivered

    @property
    def in_flight_series(self) -> np.ndarray:
        return self.queued_series + self.transit_series

    def conservation_ok(self) -> bool:
        """injected = delivered + in flight (queued + on a link) at every sample."""
        return bool(np.array_equal(self.injected_series, self.delivered_series + self.in_flight_series))

    def latency_bound_ok(self) -> bool:
        return bool(np.all(self.latencies >= self.hops * self.hop_latency_ns))

    def budget_ok(self) -> bool:
        return self.max_link_bytes_per_ns <= self.link_bandwidth

    @property
    def normalized(self) -> np.ndarray:
        return self.latencies / self.noload if self.latencies.size else np.empty(0)

    def p50(self) -> float:
        return percentile(self.latencies, 50)

    def p99(self) -> float:
        return percentile(self.latencies, 99)

    def p99_ratio(self) -> float:
        """P99 of latency over each message's own no-load latency."""
        return percentile(self.normalized, 99)

    def max_latency(self) -> float:
        return float(self.latencies.max()) if self.latencies.size else float("nan")

    def mean_latency(self) -> float:
        return float(self.latencies.mean()) if self.latencies.size else float("nan")

    def max_queue(self) -> int:
        return int(self.max_queue_bytes.max()) if self.max_queue_bytes.size else 0

    def summary(self) -> dict:
        return {
            "topology": self.topology_source, "diameter": self.diameter, "link_bandwidth": self.link_bandwidth,
            "injected": self.injected, "delivered": self.delivered, "in_flight": self.in_flight,
            "p50_ns": self.p50(), "p99_ns": self.p99(), "max_ns": self.max_latency(),
            "mean_ns": self.mean_latency(), "p99_over_noload": self.p99_ratio(),
            "max_queue_bytes": self.max_queue(), "rerouted": self.rerouted, "queued_events": self.queued_events,
            "hop_cap_hits": self.hop_cap_hits, "max_link_bytes_per_ns": self.max_link_bytes_per_ns,
            "conservation_ok": self.conservation_ok(), "latency_bound_ok": self.latency_bound_ok(),
            "budget_ok": self.budget_ok(),
        }


def empty_stats() -> NetStats:
    z = np.zeros(0, dtype=np.int64)
    return NetStats(z, z, np.zeros(0), z, z, z, z, z, z, z)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def queue_csv(stats: NetStats) -> str:
    return _csv(QUEUE_COLUMNS, zip(stats.sample_t.tolist(), stats.max_queue_bytes.tolist(),
                                   stats.frac_nonempty.tolist()))


def ccdf_csv(stats: NetStats) -> str:
    xs, ys = ccdf(stats.latencies)
    return _csv(CCDF_COLUMNS, zip(xs.tolist(), ys.tolist()))


def normalized_ccdf_csv(stats: NetStats) -> str:
    xs, ys = ccdf(stats.normalized)
    return _csv(("latency_over_noload", "ccdf"), zip(xs.tolist(), ys.tolist()))


def stats_report(stats: NetStats) -> dict:
    """Queue series, latency CCDFs (raw and over no-load) and a summary, as CSV/JSON strings."""
    header = f"# topology: {stats.topology_source}; diameter {stats.diameter}\n"
    return {
        "queue_csv": queue_csv(stats),
        "ccdf_csv": ccdf_csv(stats),
        "normalized_ccdf_csv": normalized_ccdf_csv(stats),
        "summary_json": json.dumps(stats.summary(), indent=2),
        "text": header + format_summary(stats),
    }


def format_summary(stats: NetStats) -> str:
    rows = [(k, v) for k, v in stats.summary().items() if k != "topology"]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v:.4g}" if isinstance(v, float) else f"{k:<{width}}  {v}"
                     for k, v in rows) + "\n"
