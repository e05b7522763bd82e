from .core import (
    CapacityError,
    DegreeStats,
    Graph,
    GraphFormatError,
    InsufficientDataError,
    degree_stats,
    empty_graph,
    extrapolate_property,
    fit_log_linear,
    from_csr,
    induced_on_connected,
    undirect,
)
from .generators import (
    GeneratorParamError,
    GeneratorParams,
    generate,
    generate_er,
    generate_forest_fire,
    generate_rmat,
)
from .io import load_graph, read_binary, read_edge_list, save_graph, write_binary, write_edge_list
from .split import DEFAULT_SPLIT_SIZE, SplitGraph, as_split, split_vertices

__all__ = [
    "CapacityError", "DegreeStats", "Graph", "GraphFormatError", "InsufficientDataError",
    "degree_stats", "empty_graph", "extrapolate_property", "fit_log_linear", "from_csr",
    "induced_on_connected", "undirect", "GeneratorParamError", "GeneratorParams", "generate",
    "generate_er", "generate_forest_fire", "generate_rmat", "load_graph", "read_binary",
    "read_edge_list", "save_graph", "write_binary", "write_edge_list", "DEFAULT_SPLIT_SIZE",
    "SplitGraph", "as_split", "split_vertices",
]
