import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgbench.graph import GeneratorParams, empty_graph, generate, undirect
from fgbench.kernels import UNREACHED, push_bfs, seq_bfs_oracle
from fgbench.machine import MachineConfig
from fgbench.profiler import PROFILE_COLUMNS, ParallelismProfile, profile_bfs, profile_pr


def path(n):
    return undirect([(i, i + 1) for i in range(n - 1)])


def star(n_leaves):
    return undirect([(0, i) for i in range(1, n_leaves + 1)])


@pytest.fixture(scope="module")
def rmat12():
    return generate(GeneratorParams("RMAT", 12, seed=1))


def test_path_from_end_is_all_ones():
    p = profile_bfs(path(6), 0)
    assert p.ops.tolist() == [1, 1, 1, 1, 1, 0]


def test_star_from_centre_single_busy_step():
    p = profile_bfs(star(9), 0)
    assert p.ops.tolist() == [9, 0]
    assert p.peak == 9


def test_volume_mode_matches_push_bfs_work():
    g = generate(GeneratorParams("ER", 10, seed=4))
    src = int(np.argmax(g.degrees))
    p = profile_bfs(g, src, mode="volume")
    r = push_bfs(g, MachineConfig(lanes_per_node=8), src)
    assert p.ops.tolist() == [vol for *_, vol in r.frontiers]
    assert p.total == r.work


@given(st.sampled_from(["ER", "RMAT", "FF"]), st.integers(4, 10), st.integers(0, 500))
@settings(max_examples=25, deadline=None)
def test_bfs_profile_length_and_sum(fam, scale, seed):
    g = generate(GeneratorParams(fam, scale, seed=seed))
    src = int(np.argmax(g.degrees))
    d = seq_bfs_oracle(g, src)
    ecc = int(d[d != UNREACHED].max())
    p = profile_bfs(g, src)
    assert len(p) == ecc + 1
    # oracle: directed edges going one level outward
    u, v = g.edge_pairs().T
    ok = (d[u] != UNREACHED) & (d[v] != UNREACHED)
    outward = np.count_nonzero(np.abs(d[u][ok] - d[v][ok]) == 1)
    assert p.total == outward
    assert p.ops[-1] == 0
    vol = profile_bfs(g, src, mode="volume")
    assert np.all(p.ops <= vol.ops)


def test_bfs_single_vertex():
    assert profile_bfs(empty_graph(1), 0).ops.tolist() == [0]


def test_bfs_bad_mode():
    with pytest.raises(ValueError):
        profile_bfs(path(3), 0, mode="other")


def test_push_pr_profile_constant(rmat12):
    p = profile_pr(rmat12, variant="push")
    assert len(p) >= 1
    assert set(p.ops.tolist()) == {rmat12.directed_edge_count}


def test_dd_profile_ends_with_zero_after_convergence(rmat12):
    p = profile_pr(rmat12, variant="data-driven")
    assert not p.meta["capped"]
    assert p.ops[-1] == 0
    assert p.ops[0] == rmat12.directed_edge_count


def test_dd_profile_dominated_by_push(rmat12):
    push = profile_pr(rmat12, variant="push").ops
    dd = profile_pr(rmat12, variant="data-driven").ops
    k = min(push.size, dd.size)
    assert np.all(dd[:k] <= push[:k])
    assert dd.sum() < push.sum()


def test_dd_converged_cycle():
    g = undirect([(i, (i + 1) % 8) for i in range(8)])
    p = profile_pr(g, tol=0.5, variant="data-driven")
    assert p.ops.tolist() == [16, 0]


def test_pr_bad_variant():
    with pytest.raises(ValueError):
        profile_pr(path(3), variant="pull")


def test_profile_rejects_negative():
    with pytest.raises(ValueError):
        ParallelismProfile("x", [1, -1])


def test_csv_columns_and_rows():
    p = profile_bfs(path(4), 0)
    rows = list(csv.DictReader(io.StringIO(p.to_csv("path", 2))))
    assert tuple(rows[0]) == PROFILE_COLUMNS
    assert [(int(r["step"]), int(r["ops"])) for r in rows] == [(0, 1), (1, 1), (2, 1), (3, 0)]
    assert {r["algorithm"] for r in rows} == {"push_bfs"}
    assert {r["graph"] for r in rows} == {"path"}
