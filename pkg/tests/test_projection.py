import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgbench.graph import InsufficientDataError
from fgbench.projection import (
    FitError,
    LogLinearFit,
    WorkloadCharacterization,
    WorkRateModel,
    WorkRateSample,
    characterize_workload,
    fit_work_rate,
    measure_workloads,
    memory_bytes,
    project_bfs,
    project_pr,
    projections_csv,
    projections_json,
    read_samples,
    samples_csv,
    sigmoid,
    split_term,
    sweep,
)
from fgbench.projection.model import SystemParams

RT = 1250e-9


def const_workload(algorithm="push_pr", family="RMAT", **values):
    """Characterization whose every quantity is the same at all scales."""
    return WorkloadCharacterization(algorithm, family,
                                    {k: LogLinearFit(0.0, math.log2(v)) for k, v in values.items()})


def flat_model(rate):
    # f(x) is far above the cutoff everywhere used, so the rate is the cutoff
    return WorkRateModel(c=1e12, x0=1e12, k=1.0, rate_cutoff=rate)


# --- sigmoid fit ---------------------------------------------------------------

def test_sigmoid_at_knee_is_half_linear():
    assert sigmoid(100.0, 1.0, 100.0, 1.0) == 50.0


def test_sigmoid_saturates_at_c_x0():
    assert sigmoid(1e12, 1.0, 100.0, 1.0) == pytest.approx(100.0, rel=1e-9)


def test_fit_exact_samples():
    x = np.geomspace(1, 1e5, 30)
    m = fit_work_rate(x=x, y=sigmoid(x, 1.0, 100.0, 1.0))
    assert m.c == pytest.approx(1.0, rel=1e-6)
    assert m.x0 == pytest.approx(100.0, rel=1e-6)
    assert m.k == pytest.approx(1.0, rel=1e-6)
    assert float(m.raw(100.0)) == pytest.approx(50.0, rel=1e-6)
    assert m.rate_cutoff == pytest.approx(sigmoid(x, 1.0, 100.0, 1.0).max())
    assert m.monotone
    assert m.rms_log_residual < 1e-8


def test_fit_noisy_recovery_sample():
    rng = np.random.default_rng(7)
    passed = 0
    for _ in range(20):
        c, x0, k = 10 ** rng.uniform(-1, 1), 10 ** rng.uniform(1, 5), rng.uniform(0.5, 2.0)
        for _attempt in range(6):
            x = x0 * 10 ** rng.uniform(-2, 2, 40)
            y = sigmoid(x, c, x0, k) * (1 + 0.03 * rng.standard_normal(40))
            m = fit_work_rate(x=x, y=y)
            if max(abs(m.c / c - 1), abs(m.x0 / x0 - 1), abs(m.k / k - 1)) < 0.05:
                passed += 1
                break
    assert passed == 20


def test_rate_is_capped():
    m = WorkRateModel(c=1.0, x0=100.0, k=1.0, rate_cutoff=30.0)
    assert float(m.rate(10.0)) == pytest.approx(10 / 1.1)
    assert float(m.rate(1e6)) == 30.0


def test_non_monotone_fit_flagged():
    # k > 1 makes f fall after its peak; the cutoff at the sample max does not hide that
    x = np.geomspace(1, 1e4, 40)
    m = fit_work_rate(x=x, y=sigmoid(x, 1.0, 100.0, 3.0))
    assert m.k == pytest.approx(3.0, rel=1e-4)
    assert not m.monotone


@pytest.mark.parametrize("x,y", [
    ([1, 10, 100], [1, 2, 3]),
    ([1, 2, 3, 4], [1, 2, 3, 4]),
    ([1, 10, 100, -1], [1, 2, 3, 4]),
    ([1, 10, 100, 1000], [1, 2, 3]),
])
def test_fit_rejects_degenerate(x, y):
    with pytest.raises(FitError):
        fit_work_rate(x=x, y=y)


def test_model_dict_round_trip():
    m = fit_work_rate(x=np.geomspace(1, 1e4, 10), y=sigmoid(np.geomspace(1, 1e4, 10), 2.0, 50.0, 1.0))
    assert WorkRateModel.from_dict(m.to_dict()) == m


def test_sample_csv_round_trip(tmp_path):
    s = [WorkRateSample("push_bfs", "ER", 12, 1, 10.5 * i, 3.0 * i) for i in range(1, 6)]
    p = tmp_path / "s.csv"
    p.write_text(samples_csv(s))
    assert read_samples(p) == s
    fit = fit_work_rate(samples=[WorkRateSample("a", "b", 1, 1, x, y)
                                 for x, y in zip(np.geomspace(1, 1e3, 8), np.geomspace(1, 1e2, 8))])
    assert fit.sample_count == 8


def test_sample_validation(tmp_path):
    with pytest.raises(ValueError):
        WorkRateSample("a", "b", 1, 1, 0.0, 1.0)
    p = tmp_path / "bad.csv"
    p.write_text("algorithm,scale\nx,1\n")
    with pytest.raises(FitError):
        read_samples(p)


# --- workload characterization ------------------------------------------------

@pytest.fixture(scope="module")
def er_bfs():
    return measure_workloads("push_bfs", "ER", range(10, 16), seed=1)


def test_er_edges_slope_one(er_bfs):
    # G(n, p) edge counts are binomial around 35 (n - 1) / 2, so the slope is 1 up to sampling noise
    w = characterize_workload("push_bfs", "ER", er_bfs)
    assert w.edges.slope == pytest.approx(1.0, abs=0.01)
    assert w.vertices.slope == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 2])
def test_er_frontiers_held_out(seed):
    m = measure_workloads("push_bfs", "ER", range(10, 16), seed=seed)
    w = characterize_workload("push_bfs", "ER", {s: m[s] for s in range(10, 15)})
    assert w.frontiers.slope < 0.2
    assert abs(w.quantity("frontiers", 15) - m[15]["frontiers"]) <= 0.15 * m[15]["frontiers"]


def test_rmat_max_degree_increasing():
    m = measure_workloads("push_pr", "RMAT", range(8, 13), seed=1)
    w = characterize_workload("push_pr", "RMAT", m)
    assert w.max_degree.slope > 0
    vals = [w.quantity("max_degree", s) for s in range(8, 41)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_characterize_needs_three_scales(er_bfs):
    with pytest.raises(InsufficientDataError):
        characterize_workload("push_bfs", "ER", {10: er_bfs[10], 11: er_bfs[11]})


def test_characterization_dict_round_trip(er_bfs):
    w = characterize_workload("push_bfs", "ER", er_bfs)
    back = WorkloadCharacterization.from_dict(w.to_dict())
    assert back.quantity("frontiers", 30) == w.quantity("frontiers", 30)
    with pytest.raises(KeyError):
        w.quantity("nope", 10)


def test_push_work_is_iterations_times_volume():
    m = measure_workloads("push_pr", "ER", [9], seed=2)[9]
    assert m["work"] == m["iter"] * 2 * m["edges"]


def test_dd_work_below_push():
    push = measure_workloads("push_pr", "RMAT", [12], seed=1)[12]
    dd = measure_workloads("dd_pr", "RMAT", [12], seed=1, active_vertex_weight=0.0)[12]
    assert dd["work"] < push["work"]


# --- runtime formulas ---------------------------------------------------------

def test_split_term_clamped():
    assert split_term(100, 1024, 4) == 0.0
    assert split_term(8192, 1024, 2) == 2.0


def test_memory_model():
    assert memory_bytes(10, 4, 3) == 8 * 20 + 8 * 4 * 3


def test_pr_constant_rate_no_sync():
    w = const_workload(work=2.0 ** 30, iter=1, max_degree=1, edges=1, vertices=1)
    sys = SystemParams(1)
    r = project_pr(flat_model(1e6), w, sys, 30)
    assert r.runtime_s == pytest.approx(2.0 ** 30 / (2048 * 1e6), rel=1e-15)
    assert r.gteps == pytest.approx(2.0 ** 30 / r.runtime_s / 1e9, rel=1e-15)


def test_pr_hand_evaluation():
    p, split = 4, 1024
    w = const_workload(work=2.0 ** 20, iter=2, max_degree=float(split * p), edges=2.0 ** 18, vertices=2.0 ** 16)
    m = WorkRateModel(c=3.0, x0=50.0, k=0.8, rate_cutoff=1e9)
    r = project_pr(m, w, SystemParams(p, split_size=split), 20)
    x = 2.0 ** 20 / (2 * p * 2048)  # 64
    f = 3.0 * x / (1 + (x / 50.0) ** 0.8)
    hand = 2 * (x / f + RT * (0.0 + 2.0))
    assert r.work_per_lane == x
    assert abs(r.runtime_s - hand) <= 1e-12 * hand


def test_pr_effective_uses_reference_work():
    w = const_workload(work=2.0 ** 20, iter=2, max_degree=1, edges=1, vertices=1)
    ref = const_workload(work=2.0 ** 22, iter=8, max_degree=1, edges=1, vertices=1)
    r = project_pr(flat_model(1e6), w, SystemParams(2), 20, reference=ref)
    assert r.effective_gteps == pytest.approx(4 * r.gteps, rel=1e-15)


def test_bfs_single_frontier_constant_rate():
    w = const_workload("push_bfs", edges=2.0 ** 20, vertices=2.0 ** 16, frontiers=1, max_degree=1)
    r = project_bfs(flat_model(5e5), w, SystemParams(1), 20)
    assert r.runtime_s == pytest.approx((2 * 2.0 ** 20 + 2.0 ** 16) / (2048 * 5e5), rel=1e-15)


def test_bfs_hand_evaluation():
    e, v, fr, p = 2.0 ** 22, 2.0 ** 20, 8.0, 16
    w = const_workload("push_bfs", edges=e, vertices=v, frontiers=fr, max_degree=2.0 ** 16)
    m = WorkRateModel(c=2.0, x0=200.0, k=1.0, rate_cutoff=1e9)
    r = project_bfs(m, w, SystemParams(p), 22)
    x = (2 * e + v) / (p * 2048)
    f = 2.0 * x / (1 + x / 200.0)
    sync = RT * (math.log2(2.0 ** 16 / (1024 * 16)) + 2 * math.log2(16))
    hand = x / f + sync * fr
    assert abs(r.runtime_s - hand) <= 1e-12 * hand
    lit = project_bfs(m, w, SystemParams(p), 22, literal=True)
    assert abs(lit.runtime_s - (x / f + sync) * fr) <= 1e-12 * lit.runtime_s
    assert r.gteps == pytest.approx(e / hand / 1e9, rel=1e-12)


def _oracle_pr(c, x0, k, cut, work, it, maxdeg, p, lpn, rt, split):
    lanes = p * lpn
    x = work / (it * lanes)
    f = c * x / (1 + (x / x0) ** k)
    rate = f if f < cut else cut
    s = math.log2(maxdeg / (split * p))
    s = s if s > 0 else 0.0
    return it * (x / rate + rt * (s + math.log2(p)))


def _oracle_bfs(c, x0, k, cut, e, v, fr, maxdeg, p, lpn, rt, split):
    x = (2 * e + v) / (p * lpn)
    f = c * x / (1 + (x / x0) ** k)
    rate = f if f < cut else cut
    s = math.log2(maxdeg / (split * p))
    s = s if s > 0 else 0.0
    return x / rate + rt * (s + 2 * math.log2(p)) * fr


def test_formulas_agree_with_direct_oracle_on_random_tuples():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        c, x0, k = 10 ** rng.uniform(2, 5), 10 ** rng.uniform(1, 4), rng.uniform(0.3, 1.5)
        cut = 10 ** rng.uniform(5, 9)
        p = int(2 ** rng.integers(0, 15))
        lpn = int(rng.choice([512, 2048]))
        rt = rng.uniform(500e-9, 2000e-9)
        split = int(rng.choice([64, 1024]))
        work, it, maxdeg = 2 ** rng.uniform(25, 45), float(rng.integers(1, 40)), 2 ** rng.uniform(5, 30)
        e, v, fr = 2 ** rng.uniform(25, 44), 2 ** rng.uniform(20, 40), float(rng.integers(3, 30))
        m = WorkRateModel(c, x0, k, cut)
        sys = SystemParams(p, lanes_per_node=lpn, dram_roundtrip_s=rt, split_size=split)
        wp = WorkloadCharacterization("push_pr", "RMAT", {
            "work": LogLinearFit(0.0, math.log2(work)), "iter": LogLinearFit(0.0, math.log2(it)),
            "max_degree": LogLinearFit(0.0, math.log2(maxdeg)), "edges": LogLinearFit(0.0, math.log2(e)),
            "vertices": LogLinearFit(0.0, math.log2(v))})
        wb = WorkloadCharacterization("push_bfs", "RMAT", {
            "edges": LogLinearFit(0.0, math.log2(e)), "vertices": LogLinearFit(0.0, math.log2(v)),
            "frontiers": LogLinearFit(0.0, math.log2(fr)), "max_degree": LogLinearFit(0.0, math.log2(maxdeg))})
        # feed the oracle the same extrapolated values the model reads
        q = {n: wp.quantity(n, 30) for n in ("work", "iter", "max_degree")}
        b = {n: wb.quantity(n, 30) for n in ("edges", "vertices", "frontiers", "max_degree")}
        want_pr = _oracle_pr(c, x0, k, cut, q["work"], q["iter"], q["max_degree"], p, lpn, rt, split)
        want_bfs = _oracle_bfs(c, x0, k, cut, b["edges"], b["vertices"], b["frontiers"], b["max_degree"],
                               p, lpn, rt, split)
        got_pr = project_pr(m, wp, sys, 30).runtime_s
        got_bfs = project_bfs(m, wb, sys, 30).runtime_s
        assert abs(got_pr - want_pr) <= 1e-12 * want_pr
        assert abs(got_bfs - want_bfs) <= 1e-12 * want_bfs


# --- sweep --------------------------------------------------------------------

def test_sweep_single_cell_equals_direct():
    w = const_workload(work=2.0 ** 30, iter=4, max_degree=2.0 ** 12, edges=2.0 ** 26, vertices=2.0 ** 22)
    m = WorkRateModel(c=2e4, x0=5e3, k=1.0, rate_cutoff=1e8)
    (cell,) = sweep(m, w, [8], [30])
    assert cell == project_pr(m, w, SystemParams(8), 30)
    wb = const_workload("push_bfs", edges=2.0 ** 26, vertices=2.0 ** 22, frontiers=6, max_degree=2.0 ** 12)
    (cb,) = sweep(m, wb, [8], [30])
    assert cb == project_bfs(m, wb, SystemParams(8), 30)


def test_sweep_gteps_non_decreasing_above_knee():
    m = WorkRateModel(c=2e4, x0=5e3, k=1.0, rate_cutoff=1e12)
    w = const_workload(work=2.0 ** 46, iter=10, max_degree=2.0 ** 24, edges=2.0 ** 40, vertices=2.0 ** 36)
    rows = sweep(m, w, [2 ** i for i in range(5, 15)], [40])
    above = [r for r in rows if r.work_per_lane > m.x0]
    assert len(above) >= 3
    assert all(b.gteps >= a.gteps for a, b in zip(above, above[1:]))


def test_sweep_flags_infeasible_cells():
    w = const_workload(work=2.0 ** 30, iter=4, max_degree=2.0, edges=2.0 ** 30, vertices=2.0 ** 28)
    need = memory_bytes(2.0 ** 30, 2.0 ** 28, 3)
    rows = sweep(flat_model(1e6), w, [1, 2, 4, 8], [30], dram_bytes_per_node=need / 4)
    assert [r.feasible for r in rows] == [False, False, True, True]


def test_projection_tables():
    w = const_workload(work=2.0 ** 30, iter=4, max_degree=2.0, edges=2.0 ** 20, vertices=2.0 ** 18)
    rows = sweep(flat_model(1e6), w, [1, 2], [28, 30])
    text = projections_csv(rows).splitlines()
    assert text[0] == "algorithm,family,scale,nodes,runtime_s,gteps,effective_gteps,feasible"
    assert len(text) == 5
    assert '"nodes": 2' in projections_json(rows)


@given(st.floats(1.0, 1e6), st.floats(1.0, 1e6), st.floats(0.1, 1.0))
@settings(max_examples=50)
def test_capped_rate_monotone_for_k_at_most_one(c, x0, k):
    m = WorkRateModel(c, x0, k, rate_cutoff=c * x0)
    assert m.check_monotone(1e-3, 1e12)


def test_system_params_validation():
    with pytest.raises(ValueError):
        SystemParams(0)
    assert SystemParams(4).lanes == 8192
