"""Synthetic graph families: Erdos-Renyi, Graph500 RMAT, Forest Fire."""
from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass

import numpy as np

from .core import DEFAULT_MEMORY_BUDGET, CapacityError, Graph, undirect

FAMILIES = ("ER", "RMAT", "ForestFire")
_ALIASES = {"er": "ER", "rmat": "RMAT", "forestfire": "ForestFire", "forest_fire": "ForestFire", "ff": "ForestFire"}


def canonical_family(name: str) -> str:
    return _ALIASES.get(str(name).lower(), name)


class GeneratorParamError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    family: str
    scale: int
    er_avg_degree: float = 35.0
    rmat_a: float = 0.57
    rmat_b: float = 0.19
    rmat_c: float = 0.19
    rmat_avg_degree: float = 16.0
    ff_p_burn: float = 0.4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise GeneratorParamError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.scale < 0:
            raise GeneratorParamError("scale must be non-negative")
        probs = {"rmat_a": self.rmat_a, "rmat_b": self.rmat_b,
                 "rmat_c": self.rmat_c, "ff_p_burn": self.ff_p_burn}
        for name, p in probs.items():
            if not 0.0 <= p <= 1.0:
                raise GeneratorParamError(f"{name}={p} outside [0, 1]")
        if self.rmat_a + self.rmat_b + self.rmat_c > 1.0 + 1e-12:
            raise GeneratorParamError("rmat a + b + c exceeds 1")
        if self.rmat_a + 2 * self.rmat_b > 1.0 + 1e-12:
            raise GeneratorParamError("rmat a + 2b exceeds 1")
        if self.ff_p_burn >= 1.0:
            raise GeneratorParamError("ff_p_burn must be < 1")
        if self.er_avg_degree < 0 or self.rmat_avg_degree < 0:
            raise GeneratorParamError("average degree must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


def _check_budget(n: int, expected_pairs: float, budget: int) -> None:
    need = 8 * (n + 1) + 2 * 8 * expected_pairs * 2  # CSR plus sampling scratch
    if need > budget:
        raise CapacityError(
            f"graph with {n} vertices and ~{expected_pairs:.3g} edges needs "
            f"~{need / 2**30:.1f} GiB, budget is {budget / 2**30:.1f} GiB"
        )


def _pair_from_index(k: np.ndarray) -> np.ndarray:
    """Map linear index over {(u, v): u > v} in row-major order to pairs."""
    u = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    # float sqrt can be off by one for large k
    u -= (u * (u - 1) // 2) > k
    u += ((u + 1) * u // 2) <= k
    v = k - u * (u - 1) // 2
    return np.stack([u, v], axis=1)


def generate_er(params: GeneratorParams, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Graph:
    """G(n, p) with ``p = er_avg_degree / n`` via geometric skipping over vertex pairs."""
    params.validate()
    if params.family != "ER":
        raise GeneratorParamError("generate_er needs family='ER'")
    n = 1 << params.scale
    total = n * (n - 1) // 2
    p = min(1.0, params.er_avg_degree / n) if n else 0.0
    _check_budget(n, p * total, memory_budget)
    rng = np.random.default_rng(params.seed)
    if p == 0.0 or total == 0:
        return undirect(np.empty((0, 2), np.int64), n, params.scale)

    chunks = []
    pos = -1
    batch = max(1024, int(p * total * 1.05) + 64)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        done = idx[-1] >= total
        idx = idx[idx < total]
        if idx.size:
            chunks.append(idx)
            pos = int(idx[-1])
        if done:
            break
        batch = max(1024, batch // 8)
    k = np.concatenate(chunks) if chunks else np.empty(0, np.int64)
    return undirect(_pair_from_index(k), n, params.scale)


def rmat_edges(scale: int, m: int, a: float, b: float, c: float, rng) -> np.ndarray:
    """Draw ``m`` directed RMAT samples by recursive quadrant selection."""
    u = np.zeros(m, dtype=np.int64)
    v = np.zeros(m, dtype=np.int64)
    ab, abc = a + b, a + b + c
    for _ in range(scale):
        r = rng.random(m)
        u <<= 1
        v <<= 1
        # quadrants: [0,a) top-left, [a,a+b) top-right, [a+b,a+b+c) bottom-left, rest bottom-right
        u += r >= ab
        v += ((r >= a) & (r < ab)) | (r >= abc)
    return np.stack([u, v], axis=1)


def generate_rmat(params: GeneratorParams, memory_budget: int = DEFAULT_MEMORY_BUDGET,
                  edge_samples: int | None = None) -> Graph:
    params.validate()
    if params.family != "RMAT":
        raise GeneratorParamError("generate_rmat needs family='RMAT'")
    n = 1 << params.scale
    m = int(n * params.rmat_avg_degree / 2) if edge_samples is None else int(edge_samples)
    _check_budget(n, m, memory_budget)
    rng = np.random.default_rng(params.seed)
    e = rmat_edges(params.scale, m, params.rmat_a, params.rmat_b, params.rmat_c, rng)
    return undirect(e, n, params.scale)


def forest_fire_edges(n: int, p_burn: float, seed: int) -> list[tuple[int, int]]:
    """Directed Forest Fire edge list (new vertex -> burned vertex).

    Each burning vertex ignites a geometric number (mean ``p/(1-p)``) of its
    not-yet-burned neighbors, drawn from its out- and in-links together, so
    both link directions burn with the same ``p_burn``.
    """
    rng = random.Random(seed)
    out_adj: list[list[int]] = [[] for _ in range(n)]
    in_adj: list[list[int]] = [[] for _ in range(n)]
    edges: list[tuple[int, int]] = []
    log_p = math.log(p_burn) if p_burn > 0 else None

    def fanout() -> int:
        # failures before first success with success probability 1 - p_burn
        if log_p is None:
            return 0
        return int(math.floor(math.log(1.0 - rng.random()) / log_p))

    for v in range(1, n):
        amb = rng.randrange(v)
        burned = {amb}
        queue = [amb]
        head = 0
        while head < len(queue):
            w = queue[head]
            head += 1
            k = fanout()
            if not k:
                continue
            cand = [x for x in out_adj[w] if x not in burned]
            cand += [x for x in in_adj[w] if x not in burned]
            for x in rng.sample(cand, min(k, len(cand))):
                burned.add(x)
                queue.append(x)
        for w in queue:
            edges.append((v, w))
            out_adj[v].append(w)
            in_adj[w].append(v)
    return edges


def generate_forest_fire(params: GeneratorParams, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Graph:
    params.validate()
    if params.family != "ForestFire":
        raise GeneratorParamError("generate_forest_fire needs family='ForestFire'")
    n = 1 << params.scale
    _check_budget(n, 4.0 * n, memory_budget)
    edges = forest_fire_edges(n, params.ff_p_burn, params.seed)
    return undirect(np.asarray(edges, dtype=np.int64).reshape(-1, 2), n, params.scale)


def generate(params: GeneratorParams, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Graph:
    fn = {"ER": generate_er, "RMAT": generate_rmat, "ForestFire": generate_forest_fire}
    params.validate()
    return fn[params.family](params, memory_budget)
