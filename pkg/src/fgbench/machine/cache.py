"""Direct-mapped software cache kept in a lane's scratchpad."""
from __future__ import annotations

import numpy as np

HIT, COLD_MISS, CONFLICT = 0, 1, 2

# multiplier distinct from the lane-placement hash so slot and lane bits are independent
_SLOT_MULT = np.uint64(0xC2B2AE3D27D4EB4F)


def cache_slot(keys, capacity: int) -> np.ndarray:
    """Slot index of each key: high bits of a multiplicative hash scaled onto ``capacity``."""
    k = np.asarray(keys, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        h = k * _SLOT_MULT
    return (((h >> np.uint64(32)) * np.uint64(capacity)) >> np.uint64(32)).astype(np.int64)


class SoftwareCache:
    """Direct-mapped cache of ``capacity_entries`` slots indexed by ``cache_slot``.

    A cold miss fills an empty slot for free; evicting a different key costs
    ``conflict_penalty_cycles`` (write-back plus refill from DRAM).
    """

    def __init__(self, capacity_entries: int, conflict_penalty_cycles: int):
        if capacity_entries < 1:
            raise ValueError("capacity_entries must be >= 1")
        self.capacity_entries = int(capacity_entries)
        self.conflict_penalty_cycles = int(conflict_penalty_cycles)
        self.tags = np.full(self.capacity_entries, -1, dtype=np.int64)
        self.occupancy = 0
        self.hits = self.misses = self.conflicts = 0

    @classmethod
    def for_config(cls, config) -> "SoftwareCache":
        return cls(config.cache_entries, config.latency_cycles("local_dram_roundtrip_ns"))

    def flush(self) -> None:
        self.tags.fill(-1)
        self.occupancy = 0


def cache_touch(cache: SoftwareCache, key: int) -> tuple[int, int]:
    """Look up ``key``; return (outcome, penalty cycles)."""
    slot = int(cache_slot([key], cache.capacity_entries)[0])
    tag = cache.tags[slot]
    if tag == key:
        cache.hits += 1
        return HIT, 0
    cache.misses += 1
    cache.tags[slot] = key
    if tag < 0:
        cache.occupancy += 1
        return COLD_MISS, 0
    cache.conflicts += 1
    return CONFLICT, cache.conflict_penalty_cycles
