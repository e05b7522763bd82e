from .fit import (
    SAMPLE_COLUMNS,
    FitError,
    WorkRateModel,
    WorkRateSample,
    fit_work_rate,
    read_samples,
    samples_csv,
    sigmoid,
)
from .model import (
    PROJECTION_COLUMNS,
    Projection,
    SystemParams,
    memory_bytes,
    project_bfs,
    project_pr,
    projections_csv,
    projections_json,
    split_term,
    sweep,
)
from .workload import (
    LogLinearFit,
    WorkloadCharacterization,
    characterize_workload,
    measure_workload,
    measure_workloads,
)

__all__ = [
    "SAMPLE_COLUMNS", "FitError", "WorkRateModel", "WorkRateSample", "fit_work_rate", "read_samples",
    "samples_csv", "sigmoid", "PROJECTION_COLUMNS", "Projection", "SystemParams", "memory_bytes",
    "project_bfs", "project_pr", "projections_csv", "projections_json", "split_term", "sweep",
    "LogLinearFit", "WorkloadCharacterization", "characterize_workload", "measure_workload",
    "measure_workloads",
]
