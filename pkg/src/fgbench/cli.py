"""Command-line entry point: gen, run, profile, characterize, fit, project, netsim, report."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__

THREADS_ENV = "FGBENCH_THREADS"

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONFIG = 4
EXIT_INVARIANT = 5


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


class UsageError(CliError):
    def __init__(self, message: str):
        super().__init__(message, EXIT_USAGE)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- output plumbing

def atomic_write(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return path


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


class RunManifest:
    """Sidecar record written next to every output: command, config, seeds, paths, version, wall time."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.config = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
                       if k not in ("func",)}
        self.seeds = {k: v for k, v in self.config.items() if "seed" in k}
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.started = time.perf_counter()

    def as_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "seeds": self.seeds, "inputs": self.inputs,
                "outputs": self.outputs, "version": __version__,
                "wall_seconds": time.perf_counter() - self.started}

    def write(self, path, data) -> Path:
        p = atomic_write(path, data)
        self.outputs.append(str(p))
        return p

    def finish(self) -> None:
        doc = json.dumps(self.as_dict(), indent=2, sort_keys=True, default=str)
        for out in self.outputs:
            atomic_write(manifest_path(out), doc)


def _json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)
        raise TypeError(type(o).__name__)
    return json.dumps(obj, indent=2, sort_keys=True, default=default)


def _csv_rows(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except json.JSONDecodeError as e:
        raise CliError(f"{path}: invalid JSON ({e})") from None


def _graph_info(path) -> dict:
    m = manifest_path(path)
    if m.exists():
        cfg = _read_json(m).get("config", {})
        return {"family": cfg.get("family", "unknown"), "scale": cfg.get("scale"), "seed": cfg.get("seed")}
    return {"family": "unknown", "scale": None, "seed": None}


def _load_graph(path):
    from .graph import GraphFormatError, load_graph
    try:
        return load_graph(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except GraphFormatError as e:
        raise CliError(str(e)) from None


def _set_threads() -> None:
    n = os.environ.get(THREADS_ENV)
    if not n:
        return
    import numba
    try:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be a positive integer", EXIT_CONFIG) from None


# ---------------------------------------------------------------- commands

def cmd_gen(args, man: RunManifest) -> None:
    from .graph import GeneratorParams, generate, save_graph
    kw = {k: getattr(args, k) for k in ("er_avg_degree", "rmat_avg_degree", "ff_p_burn") if getattr(args, k) is not None}
    params = GeneratorParams(args.family, args.scale, seed=args.seed, **kw)
    g = generate(params)
    save_graph(g, args.out, fmt=args.format)
    man.outputs.append(str(args.out))
    man.config["family"] = params.family
    man.config["vertices"] = g.vertex_count
    man.config["undirected_edges"] = g.undirected_edge_count


def _machine(args):
    from .machine import MachineConfig, load_machine_config
    over = {}
    if args.nodes is not None:
        over["node_count"] = args.nodes
    if args.lanes_per_node is not None:
        over["lanes_per_node"] = args.lanes_per_node
    if args.machine_config:
        return load_machine_config(args.machine_config, over)
    return MachineConfig(**over)


def cmd_run(args, man: RunManifest) -> None:
    from .graph import split_vertices
    from .kernels import BFS_KERNELS, KERNELS
    from .projection import WorkRateSample, samples_csv
    g = _load_graph(args.graph)
    man.inputs.append(str(args.graph))
    info = _graph_info(args.graph)
    family = args.family or info["family"]
    cfg = _machine(args)
    man.config["machine"] = cfg.as_dict()
    target = split_vertices(g, args.split_size) if args.split_size else g
    kw = {}
    if args.kernel in BFS_KERNELS:
        kw["source"] = args.source
        if args.kernel == "push_pull_bfs" and args.switch_fraction is not None:
            kw["switch_fraction"] = args.switch_fraction
    else:
        kw["tol"] = args.tol
        if args.max_iters is not None:
            kw["max_iters"] = args.max_iters
    res = KERNELS[args.kernel](target, cfg, **kw)
    sim = res.sim
    doc = sim.to_dict(per_lane=args.per_lane)
    doc["meta"].update({"graph": str(args.graph), "family": family})
    if args.kernel in BFS_KERNELS:
        doc["result"] = {"distance": res.distance, "frontiers": len(res.frontiers), "gteps": res.gteps,
                         "edges_traversed": res.edges_traversed, "work": res.work}
    else:
        doc["result"] = {"scores": res.scores, "iterations": res.iterations, "gteps": res.gteps,
                         "effective_gteps": res.effective_gteps, "edges_traversed": res.edges_traversed,
                         "capped": res.capped}
    man.write(args.out, _json(doc))
    if args.samples:
        lanes = sim.lane_count
        work = sim.total_work()
        if work <= 0 or sim.elapsed_seconds <= 0:
            raise CliError("run did no work; no work-rate sample", EXIT_INVARIANT)
        s = WorkRateSample(args.kernel, family, int(g.scale), cfg.node_count, work / lanes,
                           work / sim.elapsed_seconds / lanes)
        text = samples_csv([s])
        p = Path(args.samples)
        if args.append and p.exists():
            old = p.read_text()
            text = old + text.split("\n", 1)[1]
        man.write(p, text)


def cmd_profile(args, man: RunManifest) -> None:
    from .profiler import profile_bfs, profile_pr
    g = _load_graph(args.graph)
    man.inputs.append(str(args.graph))
    info = _graph_info(args.graph)
    if args.algorithm == "bfs":
        prof = profile_bfs(g, args.source, mode=args.mode)
    else:
        prof = profile_pr(g, args.tol, "push" if args.algorithm == "push_pr" else "data-driven")
    man.write(args.out, prof.to_csv(info["family"] if info["family"] != "unknown" else Path(args.graph).stem,
                                    g.scale))


def cmd_characterize(args, man: RunManifest) -> None:
    from .projection import characterize_workload, measure_workloads
    meas = measure_workloads(args.algorithm, args.family, args.scales, seed=args.seed, tol=args.tol,
                             active_vertex_weight=args.active_vertex_weight)
    w = characterize_workload(args.algorithm, args.family, meas)
    doc = w.to_dict()
    doc["measurements"] = {str(k): v for k, v in meas.items()}
    man.write(args.out, _json(doc))


def cmd_fit(args, man: RunManifest) -> None:
    from .projection import fit_work_rate, read_samples
    try:
        samples = read_samples(args.samples)
    except FileNotFoundError:
        raise CliError(f"{args.samples}: no such file") from None
    man.inputs.append(str(args.samples))
    if args.algorithm:
        samples = [s for s in samples if s.algorithm == args.algorithm]
    model = fit_work_rate(samples, starts=args.starts)
    if not model.monotone:
        print("warning: fitted rate is not monotone over the checked range", file=sys.stderr)
    man.write(args.out, _json(model.to_dict()))


def cmd_project(args, man: RunManifest) -> None:
    from .projection import WorkloadCharacterization, WorkRateModel, projections_csv, projections_json, sweep
    model = WorkRateModel.from_dict(_read_json(args.model))
    wl = WorkloadCharacterization.from_dict(_read_json(args.workload))
    man.inputs += [str(args.model), str(args.workload)]
    ref = None
    if args.reference:
        ref = WorkloadCharacterization.from_dict(_read_json(args.reference))
        man.inputs.append(str(args.reference))
    kw = {"lanes_per_node": args.lanes_per_node, "dram_roundtrip_s": args.dram_roundtrip_ns * 1e-9,
          "split_size": args.split_size}
    if args.dram_bytes_per_node is not None:
        kw["dram_bytes_per_node"] = args.dram_bytes_per_node
    rows = sweep(model, wl, args.nodes, args.scales, reference=ref, literal=args.literal, **kw)
    man.write(args.out, projections_json(rows) if args.format == "json" else projections_csv(rows))


def cmd_netsim(args, man: RunManifest) -> None:
    from .network import NetConfig, build_topology, compute_routes, simulate, stats_report
    if args.topology:
        t = build_topology(args.topology, radix=args.radix)
        man.inputs.append(str(args.topology))
    else:
        t = build_topology({"router_count": args.routers, "radix": args.radix or 14, "node_count": args.endpoints,
                            "seed": args.seed})
    routes = compute_routes(t)
    frac = None if args.injection == "max" else float(args.injection)
    cfg = NetConfig(duration_ns=args.duration, injection_fraction=frac, node_bandwidth=args.node_bandwidth,
                    link_bandwidth=args.link_bandwidth, seed=args.seed, hop_cap=args.hop_cap,
                    queue_sample_period_ns=args.sample_period)
    stats = simulate(t, routes, cfg)
    rep = stats_report(stats)
    out = Path(args.out_dir)
    man.write(out / "queue.csv", rep["queue_csv"])
    man.write(out / "ccdf.csv", rep["ccdf_csv"])
    man.write(out / "ccdf_normalized.csv", rep["normalized_ccdf_csv"])
    man.write(out / "summary.json", rep["summary_json"])
    print(rep["text"], end="")
    if not (stats.conservation_ok() and stats.latency_bound_ok() and stats.budget_ok()):
        man.finish()
        raise CliError("network invariant violated; see summary.json", EXIT_INVARIANT)


REPORT_COLUMNS = ("kernel", "graph", "scale", "nodes", "lanes", "seconds", "GTEPS", "Effective GTEPS", "Speedup")


def cmd_report(args, man: RunManifest) -> None:
    rows = []
    for p in args.inputs:
        if str(p).endswith(".manifest.json"):
            continue
        d = _read_json(p)
        man.inputs.append(str(p))
        if "result" not in d or "meta" not in d:
            raise CliError(f"{p}: not a run result")
        m, r = d["meta"], d["result"]
        eff = r.get("effective_gteps")
        rows.append({"kernel": m.get("kernel"), "graph": m.get("family", m.get("graph")), "scale": m.get("scale"),
                     "nodes": m.get("nodes"), "lanes": d.get("lanes"), "seconds": d.get("elapsed_seconds"),
                     "GTEPS": r.get("gteps"),
                     "Effective GTEPS": "" if eff is None or m.get("kernel") != "dd_pr" else eff})
    # speedup over the smallest machine in each (kernel, graph, scale) group
    base = {}
    for r in sorted(rows, key=lambda r: r["nodes"] or 0):
        key = (r["kernel"], r["graph"], r["scale"])
        base.setdefault(key, r["seconds"])
        b = base[key]
        r["Speedup"] = b / r["seconds"] if r["seconds"] else ""
    rows.sort(key=lambda r: (str(r["kernel"]), str(r["graph"]), r["scale"] or 0, r["nodes"] or 0))
    text = _csv_rows(REPORT_COLUMNS, rows)
    if args.out:
        man.write(args.out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    from .kernels import KERNELS
    from .projection.workload import ALGORITHMS

    p = _Parser(prog="fgbench", description="Fine-grained graph benchmark simulation and projection toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--error-json", action="store_true", help="print failures as JSON on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", help="generate a synthetic graph")
    s.add_argument("--family", required=True, help="ER, RMAT or ForestFire")
    s.add_argument("--scale", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--format", choices=("binary", "text"), default="binary")
    s.add_argument("--er-avg-degree", type=float)
    s.add_argument("--rmat-avg-degree", type=float)
    s.add_argument("--ff-p-burn", type=float)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("run", help="simulate a kernel on the machine model")
    s.add_argument("--kernel", choices=sorted(KERNELS), required=True)
    s.add_argument("--graph", type=Path, required=True)
    s.add_argument("--machine-config", type=Path, help="JSON machine configuration")
    s.add_argument("--nodes", type=int)
    s.add_argument("--lanes-per-node", type=int)
    s.add_argument("--source", type=int, default=0)
    s.add_argument("--tol", type=float, help="PageRank tolerance (default 1/n)")
    s.add_argument("--max-iters", type=int)
    s.add_argument("--switch-fraction", type=float)
    s.add_argument("--split-size", type=int, help="split vertices above this degree")
    s.add_argument("--family", help="graph family label (default from the graph manifest)")
    s.add_argument("--per-lane", action="store_true", help="include per-lane counters")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--samples", type=Path, help="work-rate sample CSV to write")
    s.add_argument("--append", action="store_true", help="append to an existing sample CSV")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("profile", help="available edge parallelism per step")
    s.add_argument("--graph", type=Path, required=True)
    s.add_argument("--algorithm", choices=("bfs", "push_pr", "dd_pr"), required=True)
    s.add_argument("--source", type=int, default=0)
    s.add_argument("--mode", choices=("discovery", "volume"), default="discovery")
    s.add_argument("--tol", type=float)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("characterize", help="measure workloads over scales and fit them log-linearly")
    s.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    s.add_argument("--family", required=True)
    s.add_argument("--scales", type=int, nargs="+", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float)
    s.add_argument("--active-vertex-weight", type=float, default=1.0)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_characterize)

    s = sub.add_parser("fit", help="fit the work-rate model to samples")
    s.add_argument("--samples", type=Path, required=True)
    s.add_argument("--algorithm", help="only use samples of this algorithm")
    s.add_argument("--starts", type=int, default=5)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("project", help="project runtime and GTEPS over nodes and scales")
    s.add_argument("--model", type=Path, required=True)
    s.add_argument("--workload", type=Path, required=True)
    s.add_argument("--reference", type=Path, help="baseline workload for effective GTEPS")
    s.add_argument("--nodes", type=int, nargs="+", default=[32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384])
    s.add_argument("--scales", type=int, nargs="+", default=[28, 32, 36, 40])
    s.add_argument("--lanes-per-node", type=int, default=2048)
    s.add_argument("--dram-roundtrip-ns", type=float, default=1250.0)
    s.add_argument("--split-size", type=int, default=1024)
    s.add_argument("--dram-bytes-per-node", type=float)
    s.add_argument("--literal", action="store_true", help="multiply the BFS traversal term by frontiers too")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("netsim", help="simulate interconnect congestion")
    s.add_argument("--topology", type=Path, help="topology file ('R u v' / 'N n r1 r2' lines)")
    s.add_argument("--routers", type=int, default=64)
    s.add_argument("--radix", type=int)
    s.add_argument("--endpoints", type=int, default=256, help="compute nodes of a synthetic topology")
    s.add_argument("--duration", type=int, default=5000, help="ns")
    s.add_argument("--injection", default="max", help="'max' or a fraction of node bandwidth")
    s.add_argument("--node-bandwidth", type=float, default=4400.0, help="bytes/ns")
    s.add_argument("--link-bandwidth", type=float, default=2200.0, help="bytes/ns")
    s.add_argument("--hop-cap", type=int, default=16)
    s.add_argument("--sample-period", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", type=Path, required=True)
    s.set_defaults(func=cmd_netsim)

    s = sub.add_parser("report", help="merge run results into a GTEPS table")
    s.add_argument("inputs", type=Path, nargs="+")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_report)
    return p


def _classify(exc: BaseException) -> int:
    from .graph import CapacityError, GeneratorParamError, InsufficientDataError
    from .machine import ConfigError
    from .network import TopologyError
    from .projection import FitError
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, (ConfigError, GeneratorParamError, TopologyError, CapacityError)):
        return EXIT_CONFIG
    if isinstance(exc, (FitError, InsufficientDataError, FileNotFoundError, ValueError)):
        return EXIT_INPUT
    return EXIT_INTERNAL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    want_json = "--error-json" in argv
    try:
        args = build_parser().parse_args(argv)
        _set_threads()
        man = RunManifest(args.command, args)
        args.func(args, man)
        man.finish()
        return EXIT_OK
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except Exception as e:  # noqa: BLE001 - every failure maps to an exit code
        code = _classify(e)
        if want_json:
            print(json.dumps({"error": type(e).__name__, "message": str(e), "code": code}), file=sys.stderr)
        else:
            print(f"fgbench: error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
