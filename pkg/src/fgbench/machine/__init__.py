from .cache import COLD_MISS, CONFLICT, HIT, SoftwareCache, cache_slot, cache_touch
from .config import ConfigError, MachineConfig, load_machine_config
from .engine import (
    Context,
    Machine,
    SimulationError,
    balanced_assignment,
    load_balanced_parallel_for,
    parallel_for,
    run_program,
    worker_of,
)
from .phase import PhaseDescriptor, PhaseEngine, balanced_phase, plain_phase, replay_phase, spawn_tree
from .placement import map_vertex, owner_lanes
from .result import CSV_COLUMNS, LaneCounters, PhaseRecord, SimResult

__all__ = [
    "COLD_MISS", "CONFLICT", "HIT", "SoftwareCache", "cache_slot", "cache_touch", "ConfigError", "MachineConfig",
    "load_machine_config", "Context", "Machine", "SimulationError", "balanced_assignment",
    "load_balanced_parallel_for", "parallel_for", "run_program", "worker_of", "PhaseDescriptor",
    "PhaseEngine", "balanced_phase", "plain_phase", "replay_phase", "spawn_tree", "map_vertex",
    "owner_lanes", "CSV_COLUMNS", "LaneCounters", "PhaseRecord", "SimResult",
]
