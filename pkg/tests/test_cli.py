import csv
import io
import json
import math
import subprocess
import sys

import numpy as np

from fgbench.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, EXIT_USAGE, REPORT_COLUMNS, main, manifest_path
from fgbench.graph import save_graph, undirect
from fgbench.projection import (
    WorkloadCharacterization,
    WorkRateModel,
    fit_work_rate,
    projections_csv,
    read_samples,
    sweep,
)


def run(*argv):
    return main([str(a) for a in argv])


def test_gen_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    assert run("gen", "--family", "ER", "--scale", 4, "--seed", 1, "--out", a) == EXIT_OK
    assert run("gen", "--family", "ER", "--scale", 4, "--seed", 1, "--out", b) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    # at scale 4 the ER edge probability clamps to 1, so compare seeds on a sparser graph
    c, d = tmp_path / "c.bin", tmp_path / "d.bin"
    run("gen", "--family", "ER", "--scale", 8, "--seed", 1, "--out", c)
    run("gen", "--family", "ER", "--scale", 8, "--seed", 2, "--out", d)
    assert c.read_bytes() != d.read_bytes()


def test_gen_writes_manifest(tmp_path):
    out = tmp_path / "g.bin"
    run("gen", "--family", "rmat", "--scale", 5, "--seed", 3, "--out", out)
    m = json.loads(manifest_path(out).read_text())
    assert m["command"] == "gen"
    assert m["seeds"] and 3 in m["seeds"].values()
    assert str(out) in m["outputs"]
    assert m["config"]["family"] == "RMAT"
    assert m["wall_seconds"] >= 0
    assert "version" in m


def test_run_push_bfs_on_path(tmp_path):
    n = 12
    g = tmp_path / "path.txt"
    save_graph(undirect([(i, i + 1) for i in range(n - 1)]), g, fmt="text")
    out = tmp_path / "r.json"
    assert run("run", "--kernel", "push_bfs", "--graph", g, "--lanes-per-node", 8, "--out", out) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["result"]["distance"] == list(range(n))
    assert doc["result"]["frontiers"] == n
    assert manifest_path(out).exists()


def test_run_pagerank_and_report(tmp_path):
    g = tmp_path / "g.bin"
    run("gen", "--family", "RMAT", "--scale", 8, "--seed", 1, "--out", g)
    outs = []
    for lanes in (8, 32):
        for kernel in ("push_pr", "dd_pr"):
            o = tmp_path / f"{kernel}_{lanes}.json"
            assert run("run", "--kernel", kernel, "--graph", g, "--lanes-per-node", lanes, "--out", o) == EXIT_OK
            outs.append(o)
    d = json.loads(outs[0].read_text())
    assert abs(sum(d["result"]["scores"]) - 1) < 1e-9
    table = tmp_path / "report.csv"
    assert run("report", *outs, *[manifest_path(o) for o in outs], "--out", table) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(table.read_text())))
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert len(rows) == 4
    assert {r["kernel"] for r in rows} == {"push_pagerank", "data_driven_pagerank"}
    first = [r for r in rows if r["lanes"] == "8"]
    assert all(float(r["Speedup"]) == 1.0 for r in first)


def test_end_to_end_pipeline_equals_direct_composition(tmp_path):
    samples = tmp_path / "samples.csv"
    for scale in (8, 10, 12):
        g = tmp_path / f"er{scale}.bin"
        assert run("gen", "--family", "ER", "--scale", scale, "--seed", 1, "--out", g) == EXIT_OK
        for lanes in (4, 64):
            o = tmp_path / f"r{scale}_{lanes}.json"
            assert run("run", "--kernel", "push_bfs", "--graph", g, "--lanes-per-node", lanes, "--source", 0,
                       "--out", o, "--samples", samples, "--append") == EXIT_OK
    rows = read_samples(samples)
    assert len(rows) == 6
    assert {r.family for r in rows} == {"ER"}

    model = tmp_path / "model.json"
    assert run("fit", "--samples", samples, "--out", model) == EXIT_OK
    wl = tmp_path / "wl.json"
    assert run("characterize", "--algorithm", "push_bfs", "--family", "ER", "--scales", 8, 9, 10, 11,
               "--seed", 1, "--out", wl) == EXIT_OK
    proj = tmp_path / "proj.csv"
    assert run("project", "--model", model, "--workload", wl, "--nodes", 32, 1024, 16384,
               "--scales", 28, 32, "--out", proj) == EXIT_OK

    direct_model = fit_work_rate(read_samples(samples))
    assert WorkRateModel.from_dict(json.loads(model.read_text())) == direct_model
    direct_wl = WorkloadCharacterization.from_dict(json.loads(wl.read_text()))
    want = projections_csv(sweep(direct_model, direct_wl, [32, 1024, 16384], [28, 32]))
    assert proj.read_text() == want
    got = list(csv.DictReader(io.StringIO(proj.read_text())))
    assert len(got) == 6 and all(math.isfinite(float(r["gteps"])) for r in got)


def test_fit_needs_a_decade(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("algorithm,family,scale,nodes,work_per_lane,rate_per_lane\n"
                 + "".join(f"a,ER,8,1,{x},{x}\n" for x in (1, 2, 3, 4)))
    assert run("fit", "--samples", p, "--out", tmp_path / "m.json") == EXIT_INPUT


def test_profile_csv(tmp_path):
    g = tmp_path / "g.bin"
    run("gen", "--family", "ER", "--scale", 8, "--seed", 1, "--out", g)
    out = tmp_path / "p.csv"
    assert run("profile", "--graph", g, "--algorithm", "bfs", "--out", out) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [k for k in rows[0]] == ["step", "ops", "algorithm", "graph", "scale"]
    assert rows[-1]["ops"] == "0"


def test_netsim_outputs(tmp_path, capsys):
    out = tmp_path / "net"
    code = run("netsim", "--routers", 16, "--radix", 4, "--endpoints", 32, "--duration", 300,
               "--node-bandwidth", 340, "--link-bandwidth", 68, "--out-dir", out)
    assert code == EXIT_OK
    for name in ("queue.csv", "ccdf.csv", "ccdf_normalized.csv", "summary.json"):
        assert (out / name).exists()
    s = json.loads((out / "summary.json").read_text())
    assert s["conservation_ok"] and s["budget_ok"] and s["latency_bound_ok"]
    assert "p99_over_noload" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    assert run("gen", "--family", "nope", "--scale", 4, "--out", tmp_path / "x") == EXIT_CONFIG
    assert run("run", "--kernel", "push_bfs", "--graph", tmp_path / "missing.bin",
               "--out", tmp_path / "o.json") == EXIT_INPUT
    assert run("frobnicate") == EXIT_USAGE
    assert run("gen", "--scale", 4) == EXIT_USAGE
    capsys.readouterr()
    assert run("--error-json", "gen", "--family", "nope", "--scale", 4, "--out", tmp_path / "x") == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["code"] == EXIT_CONFIG and err["error"] and err["message"]


def test_thread_env_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("FGBENCH_THREADS", "zero")
    assert run("gen", "--family", "ER", "--scale", 4, "--out", tmp_path / "g.bin") == EXIT_CONFIG
    monkeypatch.setenv("FGBENCH_THREADS", "1")
    assert run("gen", "--family", "ER", "--scale", 4, "--out", tmp_path / "g.bin") == EXIT_OK


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.txt"
    r = subprocess.run([sys.executable, "-m", "fgbench.cli", "gen", "--family", "FF", "--scale", "5",
                        "--format", "text", "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    edges = np.loadtxt(out, dtype=np.int64, ndmin=2)
    assert edges.shape[1] == 2
