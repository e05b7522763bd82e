"""Per-scale workload measurements and their log-linear extrapolation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..graph import GeneratorParams, InsufficientDataError, degree_stats, fit_log_linear, generate
from ..kernels import bfs_levels, push_iterations
from ..kernels.pagerank import ALPHA, data_driven_trace

QUANTITIES = ("work", "iter", "max_degree", "frontiers", "edges", "vertices")
ALGORITHMS = ("push_pr", "dd_pr", "push_bfs", "push_pull_bfs", "lb_push_bfs")


@dataclass(frozen=True)
class LogLinearFit:
    """value(s) = 2 ** (slope * s + intercept), fitted from measured scales."""

    slope: float
    intercept: float
    scales: tuple = ()
    values: tuple = ()

    def __call__(self, s):
        return np.exp2(self.slope * np.asarray(s, dtype=np.float64) + self.intercept)

    @classmethod
    def fit(cls, scales, values) -> "LogLinearFit":
        slope, intercept = fit_log_linear(scales, values)
        return cls(slope, intercept, tuple(int(s) for s in scales), tuple(float(v) for v in values))


@dataclass(frozen=True)
class WorkloadCharacterization:
    algorithm: str
    family: str
    fits: dict = field(default_factory=dict)  # quantity -> LogLinearFit

    def __getattr__(self, name):
        fits = self.__dict__.get("fits", {})
        if name in fits:
            return fits[name]
        raise AttributeError(name)

    def quantity(self, name: str, s):
        if name not in self.fits:
            raise KeyError(f"workload has no {name!r} record")
        return float(self.fits[name](s))

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "family": self.family,
                "fits": {k: {"slope": f.slope, "intercept": f.intercept, "scales": list(f.scales),
                             "values": list(f.values)} for k, f in self.fits.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "WorkloadCharacterization":
        fits = {k: LogLinearFit(v["slope"], v["intercept"], tuple(v.get("scales", ())), tuple(v.get("values", ())))
                for k, v in d["fits"].items()}
        return cls(d["algorithm"], d["family"], fits)


def characterize_workload(algorithm: str, family: str, measurements: dict) -> WorkloadCharacterization:
    """Fit every quantity of ``measurements`` ({scale: {quantity: value}}) log-linearly in scale."""
    scales = sorted(measurements)
    if len(scales) < 3:
        raise InsufficientDataError(f"need measurements at >= 3 scales, got {len(scales)}")
    names = set.intersection(*(set(measurements[s]) for s in scales))
    fits = {}
    for q in sorted(names):
        vals = [float(measurements[s][q]) for s in scales]
        if any(v <= 0 for v in vals):
            raise InsufficientDataError(f"{q} must be positive at every scale to fit in log space")
        fits[q] = LogLinearFit.fit(scales, vals)
    return WorkloadCharacterization(algorithm, family, fits)


def measure_workload(algorithm: str, family: str, scale: int, seed: int = 0, source: int | None = None,
                     tol: float | None = None, active_vertex_weight: float = 1.0, alpha: float = ALPHA,
                     **generator_kw) -> dict:
    """Algorithmic workload quantities of one generated graph (no machine simulation).

    Data-driven PageRank work is active volume plus ``active_vertex_weight``
    times active vertex count, summed over iterations to tolerance.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    g = generate(GeneratorParams(family, scale, seed=seed, **generator_kw))
    st = degree_stats(g)
    out = {"edges": float(g.undirected_edge_count), "vertices": float(g.vertex_count),
           "max_degree": float(max(st.max_degree, 1))}
    if algorithm == "push_pr":
        iters, _ = push_iterations(g, tol, alpha)
        out["iter"] = float(iters)
        out["work"] = float(iters * g.directed_edge_count)
    elif algorithm == "dd_pr":
        _, hist, _ = data_driven_trace(g, tol, alpha)
        out["iter"] = float(len(hist))
        out["work"] = float(sum(vol + active_vertex_weight * cnt for _, cnt, vol in hist))
    else:
        if source is None:
            source = int(np.argmax(g.degrees))
        dist, levels = bfs_levels(g, source)
        out["frontiers"] = float(len(levels))
        out["iter"] = float(len(levels))
        out["work"] = float(sum(int(g.degrees[f].sum()) for f in levels))
    return out


def measure_workloads(algorithm: str, family: str, scales, seed: int = 0, **kw) -> dict:
    return {int(s): measure_workload(algorithm, family, int(s), seed=seed, **kw) for s in scales}
