from .sim import MESSAGE_BYTES, NetConfig, message_capacity, simulate
from .stats import (
    CCDF_COLUMNS,
    QUEUE_COLUMNS,
    NetStats,
    ccdf,
    ccdf_csv,
    empty_stats,
    format_summary,
    normalized_ccdf_csv,
    percentile,
    queue_csv,
    stats_report,
)
from .topology import (
    RoutingTable,
    Topology,
    TopologyError,
    build_topology,
    compute_routes,
    expected_link_loads,
    no_load_latency_ns,
    read_topology,
    round_robin_attach,
    router_demand,
    router_diameter,
    router_distances,
    saturating_link_bandwidth,
    synthetic_topology,
    write_topology,
)

__all__ = [
    "MESSAGE_BYTES", "NetConfig", "message_capacity", "simulate", "CCDF_COLUMNS", "QUEUE_COLUMNS", "NetStats",
    "ccdf", "ccdf_csv", "empty_stats", "format_summary", "normalized_ccdf_csv", "percentile", "queue_csv",
    "stats_report", "RoutingTable", "Topology", "TopologyError", "build_topology", "compute_routes", "expected_link_loads", "router_demand",
    "no_load_latency_ns", "read_topology", "round_robin_attach", "router_diameter", "router_distances",
    "saturating_link_bandwidth", "synthetic_topology", "write_topology",
]
