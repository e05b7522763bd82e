"""Hash placement of vertices on lanes."""
from __future__ import annotations

import numpy as np

from .config import MachineConfig

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def owner_lanes(vertices, lane_count: int) -> np.ndarray:
    """Fibonacci multiplicative hash of each id, scaled onto ``lane_count`` lanes."""
    v = np.asarray(vertices, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        h = v * _GOLDEN
    return (((h >> np.uint64(32)) * np.uint64(lane_count)) >> np.uint64(32)).astype(np.int64)


def map_vertex(vertex_id: int, config: MachineConfig) -> tuple[int, int]:
    """(node, global lane) that owns ``vertex_id``."""
    lane = int(owner_lanes([vertex_id], config.total_lanes)[0])
    return lane // config.lanes_per_node, lane
