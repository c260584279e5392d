"""End-to-end acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import dataclasses
import json
import time

import numpy as np
import pytest

from oracles import bfs_grid, dijkstra, is_k_colorable, projected_gradient_qp
from spikeopt.anneal import AnnealConfig, anneal, build_qubo_network, solve_qubo, solve_sat
from spikeopt.cli import main
from spikeopt.core import NoiseSchedule, hold_state
from spikeopt.metrics import EnergyModel, EventCounts, energy_from_counts, estimate_energy
from spikeopt.problems import (
    CspInstance,
    brute_force,
    cnf_eval,
    csp_violations,
    generators,
    ising_energy,
    ising_to_qubo,
    qp_objective,
    qubo_objectives,
    qubo_to_ising,
)
from spikeopt.qp import solve_qp
from spikeopt.swarm import OsnnConfig, SwarmConfig, collaborative_solve, osnn_solve, sphere
from spikeopt.wavefront import WeightedGraph, build_graph_network, parse_grid, plan_path, sssp
from spikeopt.wta import (
    EnergyNet,
    all_states,
    build_csp_network,
    build_tsp_network,
    sample_counts,
    solve_csp,
    solve_tsp,
    total_variation,
)

pytestmark = pytest.mark.acceptance


def _three_colorable(seed):
    while True:
        edges = generators.random_graph(20, 0.15, seed)
        if is_k_colorable(20, edges, 3):
            return CspInstance.coloring(20, edges, 3)
        seed += 1000


def test_c01_qubo_anneal(report):
    hits = runs = 0
    slowest = 0.0
    for i in range(10):
        inst = generators.random_qubo(16, 100 + i)
        opt = brute_force(inst).objective
        for s in range(20):
            t0 = time.perf_counter()
            res = solve_qubo(inst, AnnealConfig(ticks=50_000), s, target=opt)
            slowest = max(slowest, time.perf_counter() - t0)
            hits += res.best_objective == opt
            runs += 1
    rate = hits / runs
    report("C01 QUBO n=16 optimal rate", rate >= 0.8 and slowest < 10.0,
           f"{hits}/{runs} optimal ({rate:.0%}, need >=80%), slowest run {slowest:.2f}s (need <10s)")


def test_c02_boltzmann_sampling(report):
    rng = np.random.default_rng(1)
    w = np.triu(rng.normal(0, 1, (8, 8)), 1)
    net = EnergyNet(w + w.T, rng.normal(0, 1, 8), 1.0)
    t0 = time.perf_counter()
    counts = sample_counts(net, 10 ** 6, seed=0, chains=256, burn_in=3 * net.hold, stride=4)
    elapsed = time.perf_counter() - t0
    tv = total_variation(counts / counts.sum(), net.distribution())
    report("C02 Boltzmann sampling", counts.sum() == 10 ** 6 and tv <= 0.05 and elapsed < 60,
           f"TV {tv:.4f} (need <=0.05) from {counts.sum()} readouts in {elapsed:.1f}s (need <60s), hold {net.hold}")


def test_c03_sat(report):
    for seed in range(100):
        f = generators.random_3cnf(20, 85, seed)
        if brute_force(f).objective == 0:
            break
    hits = 0
    for s in range(20):
        res = solve_sat(f, AnnealConfig(ticks=10 ** 5, flip_cap=1), s)
        hits += cnf_eval(f, res.best_solution)[1]
    report("C03 3-SAT n=20 m=85", hits >= 14, f"{hits}/20 satisfied within 1e5 ticks (need >=14), formula seed {seed}")


def test_c04_tsp_wta(report):
    feasible = optimal = runs = 0
    for i in range(10):
        inst = generators.random_tsp(5, i)
        opt = brute_force(inst).objective
        net = build_tsp_network(inst)
        for s in range(20):
            res = solve_tsp(net, seed=s, target=opt)
            ok = res.feasible and sorted(res.tour) == list(range(5))
            feasible += ok
            optimal += ok and res.length <= opt * (1 + 1e-12)
            runs += 1
    report("C04 TSP-WTA n=5", feasible == runs and optimal >= 0.8 * runs,
           f"{feasible}/{runs} feasible (need all), {optimal}/{runs} optimal (need >=80%)")


def test_c05_csp_coloring(report):
    inst = _three_colorable(0)
    hits = 0
    for s in range(20):
        res = solve_csp(build_csp_network(inst), seed=s)
        hits += res.success and csp_violations(inst, res.assignment) == 0
    report("C05 CSP 3-coloring G(20,0.15)", hits >= 14, f"{hits}/20 proper colorings within 1e5 ticks (need >=14)")


def test_c06_wavefront_exactness(report):
    rng = np.random.default_rng(6)
    graph_ok = 0
    for g in range(100):
        n = int(rng.integers(2, 101))
        edges = generators.random_weighted_graph(n, float(rng.uniform(1.0 / n, 4.0 / n)), 1000 + g)
        src = int(rng.integers(0, n))
        table = sssp(build_graph_network(WeightedGraph(n, tuple(edges))), src)
        graph_ok += table.to_list() == dijkstra(n, edges, src)
    maze_ok = solvable = 0
    for m in range(50):
        text = generators.random_maze(50, 50, 2000 + m)
        world = parse_grid(text)
        path = plan_path(world)
        ref = bfs_grid(text.split(), world.start, world.goal)
        solvable += ref is not None
        maze_ok += (path is None) if ref is None else (path is not None and len(path) - 1 == ref)
    report("C06 SSSP + grid planning", graph_ok == 100 and maze_ok == 50,
           f"{graph_ok}/100 graphs equal Dijkstra, {maze_ok}/50 mazes equal BFS ({solvable} solvable)")


def test_c07_qp(report):
    worst_rel = worst_viol = 0.0
    lps = 0
    for s in range(20):
        if s % 5 == 4:
            inst = generators.bounded_lp(10, 5, s)
            lps += 1
        else:
            inst = generators.random_qp(10, 5, s)
        ref = qp_objective(inst, projected_gradient_qp(inst.q, inst.p, inst.a, inst.k))
        res = solve_qp(inst)
        worst_rel = max(worst_rel, abs(res.objective - ref) / max(1.0, abs(ref)))
        worst_viol = max(worst_viol, res.max_violation)
    report("C07 QP L=10 M=5", worst_rel <= 1e-3 and worst_viol <= 1e-3,
           f"worst relative error {worst_rel:.2e}, worst violation {worst_viol:.2e} (both need <=1e-3), {lps} LPs")


def test_c08_osnn(report):
    hits = 0
    cfg = OsnnConfig(dims=7, n_particles=10, iterations=10 ** 5, target=1e-3)
    for s in range(20):
        hits += osnn_solve(sphere, (-5.12, 5.12), cfg, s).objective < 1e-3
    worst = 0.0
    checked = 0
    for s in range(5):
        logged = osnn_solve(sphere, (-5.12, 5.12), OsnnConfig(dims=7, n_particles=10, iterations=500), s, log=True)
        for _, y0, v0, y1, v1, own, recv in logged.log:
            calm = ~(own | recv)
            r0, r1 = np.hypot(y0, v0)[calm], np.hypot(y1, v1)[calm]
            nz = r0 > 0
            if nz.any():
                worst = max(worst, float(np.max(np.abs(r1[nz] / r0[nz] - cfg.delta))))
            checked += int(calm.sum())
    report("C08 OSNN sphere D=7", hits >= 16 and worst <= 1e-12 and checked > 0,
           f"{hits}/20 reach f<1e-3 (need >=16); damping deviation {worst:.1e} over {checked} quiet steps")


def _ticks_to(res, target, budget):
    return res.tick_found if res.best_objective <= target else budget


def test_c09_swarm_speedup(report):
    budget, period = 3000, 50
    base = AnnealConfig(ticks=budget)
    # first instance whose baseline needs at least 200 ticks, so a speed-up is measurable
    for inst_seed in range(20):
        inst = generators.random_qubo(50, inst_seed, low=-3, high=3)
        alone = [collaborative_solve(inst, SwarmConfig(8, period, base, False), s) for s in range(20)]
        target = min(r.best_objective for r in alone)
        base_ticks = [_ticks_to(r, target, budget) for r in alone]
        if np.median(base_ticks) >= 200:
            break
    together = [collaborative_solve(inst, SwarmConfig(8, period, base, True), s, target=target) for s in range(20)]
    collab_ticks = [_ticks_to(r, target, budget) for r in together]
    mb, mc = float(np.median(base_ticks)), float(np.median(collab_ticks))
    report("C09 swarm collaboration", mc <= mb / 1.5,
           f"instance {inst_seed}, target {target}: median ticks {mc} collaborative vs {mb} independent "
           f"(ratio {mb / max(mc, 1):.2f}, need >=1.5)")


def test_c10_determinism(report, tmp_path):
    gen = {
        "q.qubo": ["qubo", "--n", "10"], "f.cnf": ["cnf", "--n", "10", "--m", "30"], "t.tsp": ["tsp", "--n", "5"],
        "p.qp": ["qp", "--n", "5", "--m", "3"], "c.csp.json": ["csp", "--n", "6"],
        "g.edges": ["graph", "--n", "20", "--p", "0.2"], "m.grid": ["grid", "--n", "12"],
    }
    for name, args in gen.items():
        assert main(["generate", "--kind", args[0], *args[1:], "--seed", "7", "--output", str(tmp_path / name)]) == 0
    (tmp_path / "s.fn.json").write_text(json.dumps({"function": "rastrigin", "dims": 4}))
    cases = [("q.qubo", "anneal", 2000), ("q.qubo", "iterated", 1000), ("q.qubo", "swarm", 500),
             ("f.cnf", "sat", 5000), ("c.csp.json", "csp", 3000), ("t.tsp", "tsp-wta", 3000), ("t.tsp", "aco", 30),
             ("p.qp", "qp", 2000), ("s.fn.json", "osnn", 500), ("g.edges", "sssp", None), ("m.grid", "plan", None)]
    same = []
    for problem, solver, budget in cases:
        outs = []
        for rep in range(2):
            out = tmp_path / f"{solver}-{rep}.json"
            args = ["solve", "--problem", str(tmp_path / problem), "--solver", solver, "--seed", "11",
                    "--output", str(out)]
            if budget:
                args += ["--budget", str(budget)]
            assert main(args) == 0
            outs.append(out.read_bytes())
        same.append(outs[0] == outs[1])
    report("C10 determinism", all(same), f"{sum(same)}/{len(cases)} solvers byte-identical across two runs")


def _rederive(trace, network, model):
    out_deg = {}
    for s in network.synapses:
        out_deg[s.pre] = out_deg.get(s.pre, 0) + 1
    spikes = len(trace.records)
    deliveries = sum(out_deg.get(i, 0) for _, i in trace.records)
    seconds = trace.length * model.tick_duration
    parts = [model.p_static * seconds, model.p_neuron_idle * network.n * seconds, spikes * model.e_spike_emit,
             deliveries * model.e_spike_transmit, deliveries * model.e_synaptic_event,
             trace.source_spikes * model.e_source_spike, 0.0]
    total = 0.0
    for p in parts:
        total += p
    return total, deliveries


def test_c11_energy_accounting(report):
    model = EnergyModel(1e-3, 3e-11, 2e-7, 5e-12, 7e-12, 1.1e-11, 0.0, 1e-3)
    exact = checks = 0
    traces = []
    inst = generators.random_qubo(12, 3)
    cfg = AnnealConfig(ticks=1500)
    net = build_qubo_network(inst, cfg, 2)
    res = anneal(net, inst, cfg, 2, record=True)
    traces.append((res.trace, net))
    edges = generators.random_weighted_graph(40, 0.1, 5)
    gnet = build_graph_network(WeightedGraph(40, tuple(edges)))
    out = []
    sssp(gnet, 0, out)
    traces.append((out[0], gnet))
    for tr, nw in traces:
        total, deliveries = _rederive(tr, nw, model)
        est = estimate_energy(tr, nw, model)
        exact += est.total == total and tr.synaptic_events == deliveries
        checks += 1
    counts = EventCounts(ticks=500, neurons=20, spikes=300, deliveries=900, source_spikes=40, plasticity_ticks=10)
    base = EnergyModel(**{f.name: 1e-6 for f in dataclasses.fields(EnergyModel)})
    e0 = energy_from_counts(counts, base).total
    mono = [energy_from_counts(counts, dataclasses.replace(base, **{f.name: 2e-6})).total > e0
            for f in dataclasses.fields(EnergyModel)]
    report("C11 energy accounting", exact == checks and all(mono),
           f"{exact}/{checks} traces re-derived exactly; {sum(mono)}/{len(mono)} coefficients strictly monotone")


def _wta_ok(trace, subnetworks, hold):
    last = np.full(trace.n_neurons, -1)
    order = np.argsort(trace.ticks, kind="stable")
    ticks, nrn = trace.ticks[order], trace.neurons[order]
    bounds = np.searchsorted(ticks, np.arange(trace.start, trace.end + 1))
    members = [np.array(s.members) for s in subnetworks]
    for t in range(trace.start, trace.end):
        last[nrn[bounds[t - trace.start]:bounds[t - trace.start + 1]]] = t
        x = hold_state(last, t, hold)
        if any(x[m].sum() > s.k for m, s in zip(members, subnetworks)):
            return False
    return True


def test_c12_structural_laws(report):
    wta = []
    csp_net = build_csp_network(_three_colorable(2))
    res = solve_csp(csp_net, seed=1, record=True)
    wta.append(_wta_ok(res.trace, csp_net.subnetworks, csp_net.energy_net.hold))
    for i in range(3):
        tsp_net = build_tsp_network(generators.random_tsp(5, i))
        res = solve_tsp(tsp_net, AnnealConfig(ticks=3000, noise=NoiseSchedule(0.05, 0.999)), i, record=True)
        wta.append(_wta_ok(res.trace, tsp_net.subnetworks, tsp_net.energy_net.hold))
    single = 0
    for g in range(20):
        edges = generators.random_weighted_graph(30, 0.15, 300 + g)
        out = []
        sssp(build_graph_network(WeightedGraph(30, tuple(edges))), g % 30, out)
        single += bool(np.all(np.bincount(out[0].neurons, minlength=30) <= 1))
    worst = 0.0
    for n in range(1, 13):
        for s in range(3):
            inst = generators.random_qubo(n, 50 * n + s)
            xs = all_states(n)
            q = qubo_objectives(inst, xs)
            ising = qubo_to_ising(inst)
            e = np.array([ising_energy(ising, 2 * x - 1) for x in xs])
            back = qubo_objectives(ising_to_qubo(ising), xs)
            worst = max(worst, float(np.max(np.abs(q - e))), float(np.max(np.abs(q - back))))
    report("C12 structural laws", all(wta) and single == 20 and worst <= 1e-9,
           f"WTA <=k on {sum(wta)}/{len(wta)} traces, single-fire on {single}/20 wavefronts, "
           f"QUBO<->Ising max gap {worst:.1e} for n<=12")
