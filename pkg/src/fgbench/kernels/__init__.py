from .bfs import lb_push_bfs, push_bfs, push_pull_bfs
from .common import ActiveSet, BFSResult, KernelRun, PRResult, gteps, split_reduction_cycles
from .oracles import UNREACHED, bfs_levels, power_iteration_oracle, seq_bfs_oracle
from .pagerank import ALPHA, data_driven_pagerank, data_driven_trace, push_iterations, push_pagerank

KERNELS = {
    "push_pr": push_pagerank,
    "dd_pr": data_driven_pagerank,
    "push_bfs": push_bfs,
    "push_pull_bfs": push_pull_bfs,
    "lb_push_bfs": lb_push_bfs,
}
BFS_KERNELS = ("push_bfs", "push_pull_bfs", "lb_push_bfs")
PR_KERNELS = ("push_pr", "dd_pr")

__all__ = [
    "lb_push_bfs", "push_bfs", "push_pull_bfs", "ActiveSet", "BFSResult", "KernelRun", "PRResult",
    "gteps", "split_reduction_cycles", "UNREACHED", "bfs_levels", "power_iteration_oracle",
    "seq_bfs_oracle", "ALPHA", "data_driven_pagerank", "data_driven_trace", "push_iterations", "push_pagerank", "KERNELS",
    "BFS_KERNELS", "PR_KERNELS",
]
