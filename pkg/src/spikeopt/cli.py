"""Command-line harness: solve, oracle, bench, convert, generate.

Exit codes: 0 success, 2 unreadable or malformed input, 3 solver does not
fit the problem kind, 4 invalid configuration, 5 instance over the oracle's
size cap. The log level comes from the SPIKEOPT_LOG environment variable.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .anneal import AnnealConfig, iterated_anneal, solve_qubo, solve_sat
from .metrics import EnergyModel, EventCounts, energy_from_counts
from .problems import (
    ParseError,
    SizeCapError,
    brute_force,
    cnf_eval,
    csp_violations,
    generators,
    ising_to_qubo,
    load_coloring,
    parse_csp,
    parse_dimacs,
    parse_ising,
    parse_qp,
    parse_qubo,
    parse_tsp,
    qp_objective,
    qubo_objective,
    qubo_to_ising,
    tour_length,
    write_csp,
    write_dimacs,
    write_qp,
    write_qubo,
    write_tsp,
)
from .problems.io import ising_to_json, qubo_text
from .qp import QpSchedule, solve_qp
from .swarm import BENCHMARKS, AcoConfig, OsnnConfig, SwarmConfig, aco_tsp_solve, collaborative_solve, osnn_solve
from .wavefront import load_grid, parse_edge_list, plan_path, shortest_paths
from .wta import build_csp_network, build_tsp_network, solve_csp, solve_tsp

log = logging.getLogger("spikeopt")

EXIT_OK, EXIT_PARSE, EXIT_INCOMPATIBLE, EXIT_CONFIG, EXIT_CAP = 0, 2, 3, 4, 5
SCHEMA_RESULT = "spikeopt.result/1"

SOLVERS = {
    "qubo": ("anneal", "iterated", "swarm"),
    "ising": ("anneal", "iterated", "swarm"),
    "cnf": ("sat",),
    "csp": ("csp",),
    "coloring": ("csp",),
    "tsp": ("tsp-wta", "aco"),
    "qp": ("qp",),
    "function": ("osnn",),
    "graph": ("sssp",),
    "grid": ("plan",),
}
ALL_SOLVERS = sorted({s for v in SOLVERS.values() for s in v})

SUFFIXES = [
    (".ising.json", "ising"), (".qp.json", "qp"), (".csp.json", "csp"), (".fn.json", "function"),
    (".qubo", "qubo"), (".cnf", "cnf"), (".tsp", "tsp"), (".qp", "qp"), (".col", "coloring"),
    (".edges", "graph"), (".grid", "grid"),
]

BENCH_COLUMNS = ["problem", "solver", "config_hash", "seed", "status", "best_objective", "feasible",
                 "ticks_to_best", "spikes_total", "synaptic_events", "energy_total", "error"]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _configure_logging():
    level = os.environ.get("SPIKEOPT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def infer_kind(path) -> str:
    name = str(path).lower()
    for suffix, kind in SUFFIXES:
        if name.endswith(suffix):
            return kind
    raise CliError(EXIT_PARSE, f"cannot tell the problem kind of {path}; pass --kind")


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def canonical_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


# -- problem loading --------------------------------------------------------------

def load_problem(path, kind: str, config: dict):
    path = Path(path)
    if not path.exists():
        raise CliError(EXIT_PARSE, f"{path}: no such file")
    try:
        if kind == "qubo":
            return parse_qubo(path)
        if kind == "ising":
            return ising_to_qubo(parse_ising(path))
        if kind == "cnf":
            return parse_dimacs(path)
        if kind == "csp":
            return parse_csp(path)
        if kind == "coloring":
            colors = config.get("colors")
            if not isinstance(colors, int) or colors < 1:
                raise CliError(EXIT_CONFIG, "coloring problems need an integer 'colors' >= 1 in the config")
            return load_coloring(path, colors)
        if kind == "tsp":
            return parse_tsp(path)
        if kind == "qp":
            return parse_qp(path)
        if kind == "function":
            return load_function(path)
        if kind == "graph":
            return parse_edge_list(path, directed=bool(config.get("directed", True)))
        if kind == "grid":
            return load_grid(path)
    except ParseError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    raise CliError(EXIT_PARSE, f"unknown problem kind {kind!r}")


@dataclasses.dataclass(frozen=True)
class FunctionProblem:
    name: str
    dims: int
    bounds: tuple[float, float]

    def __call__(self, x) -> float:
        return BENCHMARKS[self.name][0](x)


def load_function(path) -> FunctionProblem:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, path) from None
    name = doc.get("function")
    if name not in BENCHMARKS:
        raise ParseError(f"unknown function {name!r}; choose from {sorted(BENCHMARKS)}", path=path)
    dims = doc.get("dims")
    if not isinstance(dims, int) or dims < 1:
        raise ParseError("'dims' must be a positive integer", path=path)
    lo, hi = doc.get("bounds", BENCHMARKS[name][1])
    if not lo < hi:
        raise ParseError("bounds must satisfy lo < hi", path=path)
    return FunctionProblem(name, dims, (float(lo), float(hi)))


def load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise CliError(EXIT_CONFIG, f"{p}: no such config file")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"{p}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise CliError(EXIT_CONFIG, f"{p}: config must be a JSON object")
    return doc


# -- solving -----------------------------------------------------------------------

def _pop_energy(cfg: dict) -> EnergyModel:
    return EnergyModel.from_dict(cfg.pop("energy_model", {}))


def _anneal_cfg(d: dict, budget):
    if budget is not None:
        d = {**d, "ticks": budget}
    return AnnealConfig.from_dict(d)


def _split(cfg: dict, keys) -> tuple[dict, dict]:
    picked = {k: cfg[k] for k in keys if k in cfg}
    rest = {k: v for k, v in cfg.items() if k not in keys}
    return picked, rest


def run_solver(solver: str, kind: str, inst, config: dict, seed: int, budget):
    """Run one solver and return the result fields plus the effective config."""
    cfg = dict(config)
    energy = _pop_energy(cfg)
    cfg.pop("colors", None)
    cfg.pop("directed", None)
    out: dict = {}
    if solver in ("anneal", "iterated"):
        extra, cfg = _split(cfg, ("restarts", "target"))
        ac = _anneal_cfg(cfg, budget)
        if solver == "anneal":
            res = solve_qubo(inst, ac, seed, target=extra.get("target"))
        else:
            res = iterated_anneal(inst, ac, int(extra.get("restarts", 1)), seed, extra.get("target"))
        effective = {**ac.to_dict(), **extra}
        sol = [int(v) for v in res.best_solution]
        out = dict(best_objective=qubo_objective(inst, sol), best_solution=sol, feasible=True,
                   ticks_to_best=res.tick_found, spikes_total=res.spikes_total,
                   synaptic_events=res.synaptic_events)
        counts = EventCounts(res.ticks_run, res.neurons, res.spikes_total, res.synaptic_events, res.source_spikes)
    elif solver == "swarm":
        extra, cfg = _split(cfg, ("target",))
        if budget is not None:
            cfg = {**cfg, "base": {**cfg.get("base", {}), "ticks": budget}}
        sc = SwarmConfig.from_dict(cfg)
        res = collaborative_solve(inst, sc, seed, extra.get("target"))
        effective = {**sc.to_dict(), **extra}
        sol = [int(v) for v in res.best_solution]
        out = dict(best_objective=qubo_objective(inst, sol), best_solution=sol, feasible=True,
                   ticks_to_best=res.tick_found, spikes_total=res.spikes_total,
                   synaptic_events=res.synaptic_events)
        counts = EventCounts(res.ticks_run, res.neurons, res.spikes_total, res.synaptic_events, res.source_spikes)
    elif solver == "sat":
        ac = _anneal_cfg({"flip_cap": 1, **cfg}, budget)
        res = solve_sat(inst, ac, seed)
        sol = [int(v) for v in res.best_solution]
        sat_count, ok = cnf_eval(inst, sol)
        effective = ac.to_dict()
        out = dict(best_objective=float(inst.m - sat_count), best_solution=sol, feasible=bool(ok),
                   ticks_to_best=res.tick_found, spikes_total=res.spikes_total,
                   synaptic_events=res.synaptic_events)
        counts = EventCounts(res.ticks_run, res.neurons, res.spikes_total, res.synaptic_events, res.source_spikes)
    elif solver == "csp":
        build, cfg = _split(cfg, ("penalty", "inhibition", "temperature", "hold"))
        hard, cfg = _split(cfg, ("hard",))
        ac = _anneal_cfg({"noise": {"mu": 0.0, "beta": 1.0}, "ticks": 100_000, **cfg}, budget)
        net = build_csp_network(inst, **build)
        res = solve_csp(net, ac, seed, hard=hard.get("hard", True))
        effective = {**build, **hard, "anneal": ac.to_dict()}
        sol = [None if v is None else _jsonable(v) for v in res.assignment]
        viol = csp_violations(inst, res.assignment) if None not in res.assignment else None
        out = dict(best_objective=viol, best_solution=sol, feasible=bool(res.success),
                   ticks_to_best=res.tick, spikes_total=res.spikes_total, synaptic_events=res.synaptic_events)
        counts = EventCounts(res.ticks_run, res.neurons, res.spikes_total, res.synaptic_events, res.source_spikes)
    elif solver == "tsp-wta":
        build, cfg = _split(cfg, ("excitation_scale", "city_penalty", "temperature", "hold"))
        extra, cfg = _split(cfg, ("hard", "target"))
        ac = _anneal_cfg({"noise": {"mu": 0.0, "beta": 1.0}, "ticks": 20_000, **cfg}, budget)
        net = build_tsp_network(inst, **build)
        res = solve_tsp(net, ac, seed, target=extra.get("target"), hard=extra.get("hard", True))
        effective = {**build, **extra, "anneal": ac.to_dict()}
        out = dict(best_objective=tour_length(inst, res.tour) if res.feasible else None,
                   best_solution=res.tour, feasible=res.feasible, ticks_to_best=res.tick,
                   spikes_total=res.spikes_total, synaptic_events=res.synaptic_events)
        counts = EventCounts(res.ticks_run, res.neurons, res.spikes_total, res.synaptic_events, res.source_spikes)
    elif solver == "aco":
        if budget is not None:
            cfg = {**cfg, "iterations": budget}
        ac = AcoConfig(**cfg)
        res = aco_tsp_solve(inst, ac, seed)
        effective = ac.to_dict()
        out = dict(best_objective=tour_length(inst, res.tour), best_solution=res.tour, feasible=True,
                   ticks_to_best=res.iteration_found, spikes_total=res.spikes_total,
                   synaptic_events=res.spikes_total * (inst.n - 1))
        counts = EventCounts(res.ticks_run, res.neurons, res.spikes_total, res.spikes_total * (inst.n - 1), 0)
    elif solver == "osnn":
        if budget is not None:
            cfg = {**cfg, "iterations": budget}
        oc = OsnnConfig(**{"dims": inst.dims, **cfg})
        if oc.dims != inst.dims:
            raise CliError(EXIT_CONFIG, f"config dims {oc.dims} != problem dims {inst.dims}")
        res = osnn_solve(inst, inst.bounds, oc, seed)
        effective = oc.to_dict()
        x = [float(v) for v in res.x]
        out = dict(best_objective=inst(np.array(x)), best_solution=x, feasible=True, ticks_to_best=res.sweeps,
                   spikes_total=res.spikes_emitted, synaptic_events=res.spikes_emitted)
        counts = EventCounts(res.sweeps, oc.n_particles * oc.dims, res.spikes_emitted, res.spikes_emitted, 0)
    elif solver == "qp":
        if budget is not None:
            cfg = {**cfg, "max_iters": budget}
        sc = QpSchedule(**cfg)
        res = solve_qp(inst, sc)
        effective = dataclasses.asdict(sc)
        x = [float(v) for v in res.x]
        out = dict(best_objective=qp_objective(inst, x), best_solution=x,
                   feasible=bool(res.max_violation <= 1e-3), ticks_to_best=res.iterations,
                   spikes_total=0, synaptic_events=0, converged=res.converged,
                   max_violation=res.max_violation)
        counts = EventCounts(res.iterations, inst.dims + inst.n_constraints, 0, 0, 0)
    elif solver == "sssp":
        extra, cfg = _split(cfg, ("source",))
        if cfg:
            raise CliError(EXIT_CONFIG, f"unknown config keys for sssp: {sorted(cfg)}")
        source = int(extra.get("source", 0))
        if not 0 <= source < inst.n:
            raise CliError(EXIT_CONFIG, f"source {source} outside 0..{inst.n - 1}")
        trace = []
        from .wavefront import build_graph_network, sssp
        net = build_graph_network(inst)
        table = sssp(net, source, trace)
        dist = table.to_list()
        tr = trace[0]
        deliveries = int(net.out_degree()[tr.neurons].sum())
        effective = {"source": source}
        out = dict(best_objective=float(sum(d for d in dist if d is not None)), best_solution=dist,
                   feasible=True, ticks_to_best=tr.length, spikes_total=tr.total_spikes,
                   synaptic_events=deliveries)
        counts = EventCounts(tr.length, net.n, tr.total_spikes, deliveries, tr.source_spikes)
    elif solver == "plan":
        if cfg:
            raise CliError(EXIT_CONFIG, f"unknown config keys for plan: {sorted(cfg)}")
        trace = []
        path = plan_path(inst, trace)
        tr = trace[0]
        effective = {}
        n_free = len(inst.cells())
        out = dict(best_objective=None if path is None else float(len(path) - 1),
                   best_solution=None if path is None else [list(c) for c in path],
                   feasible=path is not None, ticks_to_best=tr.length, spikes_total=tr.total_spikes,
                   synaptic_events=tr.synaptic_events)
        counts = EventCounts(tr.length, n_free, tr.total_spikes, tr.synaptic_events, tr.source_spikes)
    else:  # pragma: no cover - guarded by compatibility check
        raise CliError(EXIT_INCOMPATIBLE, f"unknown solver {solver!r}")
    effective["energy_model"] = {k: v for k, v in energy.to_dict().items() if k != "schema"}
    out["energy_breakdown"] = energy_from_counts(counts, energy).to_dict()
    return out, effective


def solve_record(problem, kind, solver, config: dict, seed: int, budget, timing: bool = False) -> dict:
    if solver not in SOLVERS.get(kind, ()):
        raise CliError(EXIT_INCOMPATIBLE, f"solver {solver!r} cannot solve {kind!r} problems "
                                          f"(use one of {', '.join(SOLVERS.get(kind, ()))})")
    inst = load_problem(problem, kind, config)
    t0 = time.perf_counter()
    try:
        out, effective = run_solver(solver, kind, inst, config, seed, budget)
    except CliError:
        raise
    except (ValueError, TypeError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: {exc}") from None
    wall = (time.perf_counter() - t0) * 1000.0
    record = {
        "schema": SCHEMA_RESULT,
        "problem": {"id": Path(problem).name, "kind": kind, "hash": file_hash(problem)},
        "solver": {"name": solver, "config": effective, "config_hash": canonical_hash(effective)},
        "seed": seed,
        "best_objective": out.pop("best_objective"),
        "best_solution": out.pop("best_solution"),
        "feasible": out.pop("feasible"),
        "ticks_to_best": out.pop("ticks_to_best"),
        "spikes_total": out.pop("spikes_total"),
        "synaptic_events": out.pop("synaptic_events"),
        "energy_breakdown": out.pop("energy_breakdown"),
        "extra": out,
        "wall_time_ms": round(wall, 3) if timing else None,
        "version": __version__,
    }
    return _jsonable(record)


RESULT_FIELDS = ("schema", "problem", "solver", "seed", "best_objective", "best_solution", "feasible",
                 "ticks_to_best", "spikes_total", "synaptic_events", "energy_breakdown", "extra",
                 "wall_time_ms", "version")


def load_result(path) -> dict:
    """Read a result JSON back, rejecting unknown schemas and unknown or missing fields."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_RESULT:
        raise ValueError(f"{path}: not a {SCHEMA_RESULT} record")
    unknown = set(doc) - set(RESULT_FIELDS)
    missing = set(RESULT_FIELDS) - set(doc)
    if unknown or missing:
        raise ValueError(f"{path}: unknown fields {sorted(unknown)}, missing fields {sorted(missing)}")
    return doc


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------------

def cmd_solve(args) -> int:
    kind = args.kind or infer_kind(args.problem)
    config = load_config(args.config)
    seeds = _seeds(args)
    records = [solve_record(args.problem, kind, args.solver, config, s, args.budget, args.timing) for s in seeds]
    _emit(dump_json(records[0] if len(records) == 1 else records), args.output)
    return EXIT_OK


def _seeds(args) -> list[int]:
    if getattr(args, "seeds", None):
        return _parse_seeds(args.seeds)
    return [args.seed]


def _parse_seeds(text: str) -> list[int]:
    out = []
    try:
        for part in str(text).split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part.strip():
                out.append(int(part))
    except ValueError:
        raise CliError(EXIT_CONFIG, f"cannot parse seeds {text!r} (use e.g. 0-4 or 1,3,5)") from None
    if not out:
        raise CliError(EXIT_CONFIG, "no seeds given")
    return out


def cmd_oracle(args) -> int:
    kind = args.kind or infer_kind(args.problem)
    config = load_config(args.config)
    if kind not in ("qubo", "ising", "cnf", "csp", "coloring", "tsp"):
        raise CliError(EXIT_INCOMPATIBLE, f"no brute-force oracle for {kind!r} problems")
    inst = load_problem(args.problem, kind, config)
    try:
        opt = brute_force(inst)
    except SizeCapError as exc:
        raise CliError(EXIT_CAP, str(exc)) from None
    doc = {
        "schema": "spikeopt.oracle/1",
        "problem": {"id": Path(args.problem).name, "kind": kind, "hash": file_hash(args.problem)},
        "objective": opt.objective,
        "solution": opt.solution,
        "satisfied": opt.satisfied,
        "version": __version__,
    }
    _emit(dump_json(_jsonable(doc)), args.output)
    return EXIT_OK


def _bench_job(job):
    idx, entry, seed, base_dir = job
    problem = str((base_dir / entry["problem"]).resolve()) if not Path(entry["problem"]).is_absolute() \
        else entry["problem"]
    solver = entry["solver"]
    row = {"problem": entry["problem"], "solver": solver, "seed": seed}
    try:
        kind = entry.get("kind") or infer_kind(problem)
        config = entry.get("config", {})
        if isinstance(config, str):
            config = load_config(base_dir / config)
        rec = solve_record(problem, kind, solver, config, seed, entry.get("budget"))
        target = entry.get("target")
        ok = bool(rec["feasible"])
        if target is not None and rec["best_objective"] is not None:
            ok = ok and rec["best_objective"] <= target
        row.update(config_hash=rec["solver"]["config_hash"], status="ok" if ok else "miss",
                   best_objective=rec["best_objective"], feasible=rec["feasible"],
                   ticks_to_best=rec["ticks_to_best"], spikes_total=rec["spikes_total"],
                   synaptic_events=rec["synaptic_events"], energy_total=rec["energy_breakdown"]["total"],
                   error="")
    except CliError as exc:
        row.update(config_hash="", status="error", error=f"exit {exc.code}: {exc}")
    except Exception as exc:  # a crashing run must not take the suite down
        row.update(config_hash="", status="error", error=f"{type(exc).__name__}: {exc}")
    return idx, seed, row


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_bench(args) -> int:
    suite_path = Path(args.suite)
    if not suite_path.exists():
        raise CliError(EXIT_PARSE, f"{suite_path}: no such file")
    try:
        suite = json.loads(suite_path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{suite_path}:{exc.lineno}: {exc.msg}") from None
    runs = suite.get("runs") if isinstance(suite, dict) else None
    if not isinstance(runs, list) or not all(isinstance(r, dict) and "problem" in r and "solver" in r for r in runs):
        raise CliError(EXIT_CONFIG, "suite needs a 'runs' list of {problem, solver, ...} objects")
    seeds = _parse_seeds(args.seeds) if args.seeds else list(suite.get("seeds", [0]))
    jobs = [(i, entry, s, suite_path.parent) for i, entry in enumerate(runs) for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_bench_job, jobs))
    else:
        results = [_bench_job(j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    for _, _, row in results:
        w.writerow({k: _fmt(row.get(k)) for k in BENCH_COLUMNS})
    summary = []
    for i, entry in enumerate(runs):
        rows = [r for idx, _, r in results if idx == i]
        done = [r for r in rows if r["status"] != "error"]
        ticks = [r["ticks_to_best"] for r in done if r["status"] == "ok"]
        energy = [r["energy_total"] for r in done]
        summary.append({
            "problem": entry["problem"], "solver": entry["solver"], "runs": len(rows),
            "errors": len(rows) - len(done),
            "success_rate": (sum(r["status"] == "ok" for r in rows) / len(rows)) if rows else 0.0,
            "median_ticks_to_best": statistics.median(ticks) if ticks else None,
            "mean_energy": (sum(energy) / len(energy)) if energy else None,
        })
    if args.output:
        out = Path(args.output)
        out.write_text(buf.getvalue())
        out.with_suffix(".json").write_text(dump_json(summary))
    else:
        sys.stdout.write(buf.getvalue())
        sys.stderr.write(dump_json(summary))
    return EXIT_OK


def cmd_convert(args) -> int:
    kind = args.kind or infer_kind(args.problem)
    if kind == "qubo":
        inst = load_problem(args.problem, kind, {})
        _emit(dump_json(ising_to_json(qubo_to_ising(inst))), args.output)
    elif kind == "ising":
        try:
            ising = parse_ising(args.problem)
        except ParseError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from None
        qubo = ising_to_qubo(ising)
        _emit(qubo_text(qubo), args.output)
        if qubo.offset:
            log.warning("the constant offset %r is not representable in the QUBO text format", qubo.offset)
    else:
        raise CliError(EXIT_INCOMPATIBLE, f"convert handles qubo <-> ising, not {kind!r}")
    return EXIT_OK


def cmd_generate(args) -> int:
    if not args.output:
        raise CliError(EXIT_CONFIG, "generate needs --output")
    k, n, s = args.kind, args.n, args.seed
    if n is None or n < 1:
        raise CliError(EXIT_CONFIG, "generate needs --n >= 1")
    if k == "qubo":
        write_qubo(generators.random_qubo(n, s), args.output)
    elif k == "cnf":
        write_dimacs(generators.random_3cnf(n, args.m or round(4.25 * n), s), args.output)
    elif k == "tsp":
        write_tsp(generators.random_tsp(n, s), args.output)
    elif k == "qp":
        write_qp(generators.random_qp(n, args.m or 5, s), args.output)
    elif k == "csp":
        write_csp(generators.random_csp(n, 3, 0.3, 0.3, s), args.output)
    elif k == "graph":
        edges = generators.random_weighted_graph(n, args.p, s)
        Path(args.output).write_text(f"{n} {len(edges)}\n" + "".join(f"{u} {v} {w}\n" for u, v, w in edges))
    elif k == "grid":
        Path(args.output).write_text(generators.random_maze(n, args.m or n, s))
    else:
        raise CliError(EXIT_CONFIG, f"cannot generate {k!r} problems")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spikeopt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a solver on one problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--kind", choices=sorted(SOLVERS))
    s.add_argument("--solver", required=True, choices=ALL_SOLVERS)
    s.add_argument("--config", help="JSON config file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--seeds", help="several seeds, e.g. 0-4 or 1,3,5 (overrides --seed)")
    s.add_argument("--budget", type=int, help="tick / iteration budget override")
    s.add_argument("--output", help="result JSON path (default stdout)")
    s.add_argument("--timing", action="store_true", help="record wall_time_ms (breaks byte-identical output)")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="brute-force optimum of a small instance")
    o.add_argument("--problem", required=True)
    o.add_argument("--kind", choices=sorted(SOLVERS))
    o.add_argument("--config", help="JSON config (e.g. colors for .col graphs)")
    o.add_argument("--output")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run a suite of (problem, solver, config) entries over seeds")
    b.add_argument("suite")
    b.add_argument("--seeds")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--output", help="CSV path; the summary goes next to it as .json")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("convert", help="QUBO <-> Ising JSON")
    c.add_argument("--problem", required=True)
    c.add_argument("--kind", choices=["qubo", "ising"])
    c.add_argument("--output")
    c.set_defaults(func=cmd_convert)

    g = sub.add_parser("generate", help="write a seeded random instance")
    g.add_argument("--kind", required=True, choices=["qubo", "cnf", "tsp", "qp", "csp", "graph", "grid"])
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int, help="clauses / constraints / grid height")
    g.add_argument("--p", type=float, default=0.1, help="edge probability for graphs")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"spikeopt: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
