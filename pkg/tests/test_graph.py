import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgbench.graph import (
    CapacityError,
    GeneratorParamError,
    GeneratorParams,
    GraphFormatError,
    InsufficientDataError,
    degree_stats,
    extrapolate_property,
    generate,
    generate_er,
    generate_forest_fire,
    generate_rmat,
    load_graph,
    read_binary,
    save_graph,
    split_vertices,
    undirect,
)
from fgbench.graph.generators import _pair_from_index


def adjacency_sets(g):
    return {v: set(g.neighbors(v).tolist()) for v in range(g.vertex_count)}


def star(n_leaves):
    return undirect([(0, i) for i in range(1, n_leaves + 1)])


# --- undirect -------------------------------------------------------------

def test_undirect_merges_reverse_pair():
    g = undirect([(0, 1), (1, 0)])
    assert g.undirected_edge_count == 1
    assert g.neighbors(0).tolist() == [1] and g.neighbors(1).tolist() == [0]


def test_undirect_drops_self_loop():
    g = undirect([(2, 2)])
    assert g.vertex_count == 3 and g.undirected_edge_count == 0


def test_undirect_matches_set_oracle():
    rng = np.random.default_rng(11)
    e = rng.integers(0, 500, size=(10_000, 2))
    g = undirect(e, 500)
    g.check()
    oracle = {v: set() for v in range(500)}
    for u, v in e.tolist():
        if u != v:
            oracle[u].add(v)
            oracle[v].add(u)
    assert adjacency_sets(g) == oracle


def test_undirect_rejects_out_of_range():
    with pytest.raises(GraphFormatError):
        undirect([(0, 5)], vertex_count=3)


# --- Erdos-Renyi ------------------------------------------------------------

def test_er_zero_degree_is_empty():
    g = generate_er(GeneratorParams("ER", 4, er_avg_degree=0))
    assert g.vertex_count == 16 and g.undirected_edge_count == 0


@pytest.mark.parametrize("seed", range(1, 6))
def test_er_mean_degree_scale16(seed):
    g = generate_er(GeneratorParams("ER", 16, seed=seed))
    # E[deg] = p (n - 1) with p = 35 / n
    n = g.vertex_count
    expected = 35.0 * (n - 1) / n
    assert abs(degree_stats(g).mean_degree - expected) / expected < 0.03


def test_pair_index_mapping_is_bijective():
    n = 300
    k = np.arange(n * (n - 1) // 2)
    pairs = _pair_from_index(k)
    assert np.all(pairs[:, 0] > pairs[:, 1]) and np.all(pairs[:, 1] >= 0)
    assert np.unique(pairs[:, 0] * n + pairs[:, 1]).size == k.size
    big = np.array([2**55 - 1, 2**54 + 12345], dtype=np.int64)
    u, v = _pair_from_index(big).T
    assert np.array_equal(u * (u - 1) // 2 + v, big)
    assert np.all(v < u)


def _naive_er(n, p, rng):
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    return undirect(np.stack([iu[0][keep], iu[1][keep]], axis=1), n)


def test_er_skipping_matches_naive_bernoulli_statistics():
    # per-pair inclusion frequency and edge-count law agree with n^2 Bernoulli trials
    scale, trials = 5, 400
    n = 1 << scale
    p = 8.0 / n
    freq_skip = np.zeros((n, n))
    freq_naive = np.zeros((n, n))
    counts_skip, counts_naive = [], []
    rng = np.random.default_rng(0)
    for seed in range(trials):
        g = generate_er(GeneratorParams("ER", scale, er_avg_degree=8.0, seed=seed))
        h = _naive_er(n, p, rng)
        for graph, freq, counts in ((g, freq_skip, counts_skip), (h, freq_naive, counts_naive)):
            pr = graph.edge_pairs()
            freq[pr[:, 0], pr[:, 1]] += 1
            counts.append(graph.undirected_edge_count)
    pairs = n * (n - 1) / 2
    mean, sd = pairs * p, math.sqrt(pairs * p * (1 - p))
    for counts in (counts_skip, counts_naive):
        assert abs(np.mean(counts) - mean) < 4 * sd / math.sqrt(trials)
        assert 0.8 < np.std(counts) / sd < 1.2
    iu = np.triu_indices(n, 1)
    f_skip = freq_skip[iu] / trials
    # every pair is hit with probability p: chi-square style bound on the spread
    z = (f_skip - p) / math.sqrt(p * (1 - p) / trials)
    assert abs(z.mean()) < 0.2 and 0.85 < z.std() < 1.15
    assert abs((freq_naive[iu] / trials).mean() - f_skip.mean()) < 0.01


def test_er_capacity_error():
    with pytest.raises(CapacityError):
        generate_er(GeneratorParams("ER", 28))


# --- RMAT -----------------------------------------------------------------

def test_rmat_zero_samples_is_empty():
    g = generate_rmat(GeneratorParams("RMAT", 4), edge_samples=0)
    assert g.vertex_count == 16 and g.undirected_edge_count == 0


def test_rmat_invalid_probabilities():
    with pytest.raises(GeneratorParamError):
        generate_rmat(GeneratorParams("RMAT", 4, rmat_a=0.9, rmat_b=0.1, rmat_c=0.1))
    with pytest.raises(GeneratorParamError):
        generate_rmat(GeneratorParams("RMAT", 4, rmat_a=-0.1))


def _reference_rmat(scale, m, seed, a=0.57, b=0.19, c=0.19):
    # scalar quadrant recursion, independent RNG stream
    rnd = random.Random(seed)
    out = []
    for _ in range(m):
        u = v = 0
        for _ in range(scale):
            u, v = u << 1, v << 1
            r = rnd.random()
            if r < a:
                pass
            elif r < a + b:
                v += 1
            elif r < a + b + c:
                u += 1
            else:
                u += 1
                v += 1
        out.append((u, v))
    return undirect(out, 1 << scale)


def test_rmat_scale16_skew():
    s = degree_stats(generate_rmat(GeneratorParams("RMAT", 16, seed=7)))
    assert s.max_degree / s.mean_degree >= 50
    assert s.connected_vertex_count / s.vertex_count <= 0.7


def test_rmat_matches_reference_sampler_statistics():
    scale = 12
    n = 1 << scale
    ours = [degree_stats(generate_rmat(GeneratorParams("RMAT", scale, seed=s))) for s in range(4)]
    ref = [degree_stats(_reference_rmat(scale, 8 * n, 100 + s)) for s in range(4)]

    def avg(stats, f):
        return np.mean([f(x) for x in stats])

    for f, tol in ((lambda x: x.mean_degree, 0.02),
                   (lambda x: x.connected_vertex_count / x.vertex_count, 0.03),
                   (lambda x: x.max_degree, 0.15)):
        assert abs(avg(ours, f) - avg(ref, f)) / avg(ref, f) < tol


def test_rmat_skew_grows_with_scale():
    ratios = []
    for scale in (12, 14, 16):
        r = [degree_stats(generate_rmat(GeneratorParams("RMAT", scale, seed=s))) for s in range(3)]
        ratios.append(np.mean([x.max_degree / x.mean_degree for x in r]))
    assert ratios[0] < ratios[1] < ratios[2]


# --- Forest Fire ----------------------------------------------------------

def test_forest_fire_single_vertex():
    g = generate_forest_fire(GeneratorParams("ForestFire", 0))
    assert g.vertex_count == 1 and g.undirected_edge_count == 0


def _reference_forest_fire(n, p, seed):
    # direct burn-process simulation: union of in/out links, geometric fan-out
    rnd = random.Random(seed)
    nbrs = [set() for _ in range(n)]
    edges = set()
    for v in range(1, n):
        start = rnd.randrange(v)
        seen, frontier = {start}, [start]
        while frontier:
            nxt = []
            for w in frontier:
                k = 0
                while rnd.random() < p:
                    k += 1
                cand = sorted(nbrs[w] - seen)
                for x in rnd.sample(cand, min(k, len(cand))):
                    seen.add(x)
                    nxt.append(x)
            frontier = nxt
        for w in seen:
            nbrs[v].add(w)
            nbrs[w].add(v)
            edges.add((min(v, w), max(v, w)))
    return 2 * len(edges) / n


def test_forest_fire_mean_degree_matches_reference():
    ours = [degree_stats(generate_forest_fire(GeneratorParams("ForestFire", 14, seed=3 + s))).mean_degree
            for s in range(5)]
    ref = [_reference_forest_fire(1 << 14, 0.4, 1000 + s) for s in range(5)]
    assert abs(np.mean(ours) - np.mean(ref)) / np.mean(ref) < 0.25


# --- generic invariants ----------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(family=st.sampled_from(["ER", "RMAT", "ForestFire"]),
       scale=st.integers(0, 9), seed=st.integers(0, 2**63 - 1))
def test_generators_produce_valid_graphs(family, scale, seed):
    g = generate(GeneratorParams(family, scale, er_avg_degree=6.0, seed=seed))
    g.check()
    assert g.degrees.sum() == 2 * g.undirected_edge_count


@pytest.mark.parametrize("family", ["ER", "RMAT", "ForestFire"])
def test_generators_are_deterministic(family):
    a = generate(GeneratorParams(family, 10, seed=99))
    b = generate(GeneratorParams(family, 10, seed=99))
    c = generate(GeneratorParams(family, 10, seed=100))
    assert a.same_as(b)
    assert not a.same_as(c)


# --- splitting ------------------------------------------------------------

def test_split_star():
    sg = split_vertices(star(10_000), 1024)
    assert np.sum(sg.master_of == 0) == 10
    assert sg.base.degrees.max() <= 1024
    sg.base.check()


def test_split_identity_when_degrees_small():
    g = generate(GeneratorParams("ER", 8, er_avg_degree=5.0, seed=1))
    sg = split_vertices(g, 1024)
    assert sg.base.same_as(g)
    assert np.array_equal(sg.master_of, np.arange(g.vertex_count))


def test_split_rejects_tiny_split_size():
    with pytest.raises(ValueError):
        split_vertices(star(3), 1)


@settings(max_examples=30, deadline=None)
@given(scale=st.integers(2, 10), seed=st.integers(0, 10**6), split=st.integers(2, 40))
def test_split_merge_reconstructs(scale, seed, split):
    g = generate(GeneratorParams("RMAT", scale, seed=seed))
    sg = split_vertices(g, split)
    sg.base.check()
    assert sg.base.degrees.max(initial=0) <= split
    assert sg.merged().same_as(g)
    assert np.array_equal(sg.copies_per_master(), np.maximum(1, -(-g.degrees // split)))


# --- degree stats / extrapolation -------------------------------------------

def test_degree_stats_empty_and_path():
    s = degree_stats(undirect(np.empty((0, 2)), 0))
    assert (s.max_degree, s.mean_degree, s.connected_vertex_count) == (0, 0.0, 0)
    s = degree_stats(undirect([(0, 1), (1, 2)]))
    assert s.max_degree == 2 and s.mean_degree == pytest.approx(4 / 3)


def test_degree_stats_connected_count_linear_scan():
    g = generate(GeneratorParams("ER", 16, er_avg_degree=2.0, seed=5))
    count = 0
    for v in range(g.vertex_count):
        if g.indptr[v + 1] > g.indptr[v]:
            count += 1
    s = degree_stats(g)
    assert s.connected_vertex_count == count < g.vertex_count
    assert s.max_degree >= s.mean_degree
    assert sum(s.degree_histogram) == count


def test_extrapolate_exact_exponential():
    scales = list(range(8, 17))
    assert extrapolate_property(scales, [2.0**s for s in scales], 28) == pytest.approx(2.0**28, rel=1e-9)


def test_extrapolate_constant():
    assert extrapolate_property([8, 10, 12], [7.0, 7.0, 7.0], 40) == pytest.approx(7.0, rel=1e-12)


def test_extrapolate_noisy():
    rng = np.random.default_rng(3)
    scales = np.arange(8, 25)
    vals = 3 * 2 ** (0.9 * scales) * (1 + 0.01 * rng.standard_normal(scales.size))
    truth = 3 * 2 ** (0.9 * 40)
    assert abs(extrapolate_property(scales, vals, 40) - truth) / truth < 0.10


def test_extrapolate_needs_two_points():
    with pytest.raises(InsufficientDataError):
        extrapolate_property([10], [5.0], 20)


# --- file formats ---------------------------------------------------------

@pytest.mark.parametrize("fmt", ["binary", "text"])
def test_roundtrip(tmp_path, fmt):
    g = generate(GeneratorParams("RMAT", 9, seed=4))
    path = tmp_path / f"g.{fmt}"
    save_graph(g, path, fmt)
    h = load_graph(path)
    assert h.same_as(g) or (fmt == "text" and h.vertex_count <= g.vertex_count)
    if fmt == "binary":
        assert h.scale == g.scale


def test_binary_layout(tmp_path):
    g = undirect([(0, 1), (1, 2)])
    path = tmp_path / "g.fggs"
    save_graph(g, path)
    raw = path.read_bytes()
    assert raw[:4] == b"FGGS"
    assert int.from_bytes(raw[4:8], "little") == 1
    assert int.from_bytes(raw[16:24], "little") == 3
    assert int.from_bytes(raw[24:32], "little") == 4


def test_edge_list_comments_and_errors(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("# header\n0 1\n\n1 2  # trailing\n")
    g = load_graph(p)
    assert g.undirected_edge_count == 2
    p.write_text("0 x\n")
    with pytest.raises(GraphFormatError):
        load_graph(p)
    bad = tmp_path / "bad.fggs"
    bad.write_bytes(b"FGGS" + b"\0" * 10)
    with pytest.raises(GraphFormatError):
        read_binary(bad)
