import csv
import itertools
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from spikeopt.cli import (
    BENCH_COLUMNS,
    EXIT_CAP,
    EXIT_CONFIG,
    EXIT_INCOMPATIBLE,
    EXIT_PARSE,
    RESULT_FIELDS,
    FunctionProblem,
    load_result,
    main,
)
from spikeopt.problems import (
    QuboInstance,
    cnf_eval,
    generators,
    ising_energy,
    parse_dimacs,
    parse_ising,
    parse_qp,
    parse_qubo,
    parse_tsp,
    qp_objective,
    qubo_objective,
    tour_length,
    write_qubo,
)
from spikeopt.wavefront import parse_edge_list

FIXTURES = Path(__file__).parent / "fixtures"
TWO = FIXTURES / "two.qubo"


def _run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def _gen(tmp_path, kind, name, *extra):
    path = tmp_path / name
    assert main(["generate", "--kind", kind, "--output", str(path), *map(str, extra)]) == 0
    return path


def test_solve_two_variable_fixture(capsys):
    code, out, _ = _run(["solve", "--problem", TWO, "--solver", "anneal", "--budget", "200"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert list(rec) == list(RESULT_FIELDS)
    assert rec["best_objective"] == -2 and rec["best_solution"] == [1, 1] and rec["feasible"]
    assert rec["schema"] == "spikeopt.result/1" and rec["wall_time_ms"] is None


def test_solve_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["solve", "--problem", str(TWO), "--solver", "anneal", "--seed", "3",
                     "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert _run(["solve", "--problem", tmp_path / "none.qubo", "--solver", "anneal"], capsys)[0] == EXIT_PARSE
    assert _run(["solve", "--problem", TWO, "--solver", "sat"], capsys)[0] == EXIT_INCOMPATIBLE
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert _run(["solve", "--problem", TWO, "--solver", "anneal", "--config", bad], capsys)[0] == EXIT_CONFIG
    bad.write_text(json.dumps({"ticks": -5}))
    assert _run(["solve", "--problem", TWO, "--solver", "anneal", "--config", bad], capsys)[0] == EXIT_CONFIG
    broken = tmp_path / "broken.qubo"
    broken.write_text("2 1\n0 x 1\n")
    code, _, err = _run(["solve", "--problem", broken, "--solver", "anneal"], capsys)
    assert code == EXIT_PARSE and ":2" in err
    assert _run(["solve", "--problem", TWO], capsys)[0] == EXIT_PARSE
    assert _run(["solve", "--problem", TWO, "--solver", "anneal", "--seeds", "x-y"], capsys)[0] == EXIT_CONFIG


def test_seeds_range(capsys):
    code, out, _ = _run(["solve", "--problem", TWO, "--solver", "anneal", "--seeds", "0-2,5"], capsys)
    assert code == 0 and [r["seed"] for r in json.loads(out)] == [0, 1, 2, 5]


def test_oracle(tmp_path, capsys):
    big = tmp_path / "big.qubo"
    write_qubo(QuboInstance(np.zeros((25, 25))), big)
    assert _run(["oracle", "--problem", big], capsys)[0] == EXIT_CAP
    zero = tmp_path / "z.qubo"
    write_qubo(QuboInstance(np.zeros((4, 4))), zero)
    code, out, _ = _run(["oracle", "--problem", zero], capsys)
    assert code == 0 and json.loads(out)["objective"] == 0
    tsp = _gen(tmp_path, "tsp", "five.tsp", "--n", 5, "--seed", 2)
    code, out, _ = _run(["oracle", "--problem", tsp], capsys)
    inst = parse_tsp(tsp)
    best = min(tour_length(inst, p) for p in itertools.permutations(range(5)))
    assert code == 0 and json.loads(out)["objective"] == pytest.approx(best, rel=1e-12)


def _reevaluate(path, kind, rec):
    sol = rec["best_solution"]
    if kind == "qubo":
        return qubo_objective(parse_qubo(path), sol)
    if kind == "cnf":
        f = parse_dimacs(path)
        return float(f.m - cnf_eval(f, sol)[0])
    if kind == "tsp":
        return tour_length(parse_tsp(path), sol)
    if kind == "qp":
        return qp_objective(parse_qp(path), sol)
    if kind == "function":
        doc = json.loads(Path(path).read_text())
        return FunctionProblem(doc["function"], doc["dims"], (-5.12, 5.12))(np.array(sol))
    if kind == "graph":
        return float(sum(d for d in sol if d is not None))
    if kind == "grid":
        return float(len(sol) - 1)
    raise AssertionError(kind)


def test_every_solver_reproducible_and_rederivable(tmp_path):
    q = _gen(tmp_path, "qubo", "q.qubo", "--n", 8, "--seed", 1)
    cnf = _gen(tmp_path, "cnf", "f.cnf", "--n", 8, "--m", 20, "--seed", 1)
    tsp = _gen(tmp_path, "tsp", "t.tsp", "--n", 5, "--seed", 1)
    qp = _gen(tmp_path, "qp", "p.qp", "--n", 4, "--m", 2, "--seed", 1)
    csp = _gen(tmp_path, "csp", "c.csp.json", "--n", 5, "--seed", 1)
    graph = _gen(tmp_path, "graph", "g.edges", "--n", 12, "--p", 0.3, "--seed", 1)
    grid = _gen(tmp_path, "grid", "m.grid", "--n", 8, "--m", 6, "--seed", 1)
    fn = tmp_path / "s.fn.json"
    fn.write_text(json.dumps({"function": "sphere", "dims": 3}))
    cases = [(q, "qubo", "anneal", 500), (q, "qubo", "iterated", 500), (q, "qubo", "swarm", 300),
             (cnf, "cnf", "sat", 2000), (csp, "csp", "csp", 2000), (tsp, "tsp", "tsp-wta", 3000),
             (tsp, "tsp", "aco", 20), (qp, "qp", "qp", 3000), (fn, "function", "osnn", 300),
             (graph, "graph", "sssp", None), (grid, "grid", "plan", None)]
    for path, kind, solver, budget in cases:
        outs = []
        for _ in range(2):
            out = tmp_path / f"{solver}.json"
            args = ["solve", "--problem", str(path), "--solver", solver, "--seed", "4", "--output", str(out)]
            if budget:
                args += ["--budget", str(budget)]
            assert main(args) == 0, solver
            outs.append(out.read_bytes())
        assert outs[0] == outs[1], solver
        rec = load_result(tmp_path / f"{solver}.json")
        if rec["best_objective"] is not None and kind != "csp":
            assert _reevaluate(path, kind, rec) == rec["best_objective"], solver
        eb = rec["energy_breakdown"]
        total = 0.0
        for k in ("static", "neuron_idle", "spike_emit", "spike_transmit", "synaptic_events", "source_spikes",
                  "plasticity"):
            total += eb[k]
        assert total == eb["total"]


def test_sssp_matches_graph(tmp_path, capsys):
    graph = _gen(tmp_path, "graph", "g.edges", "--n", 10, "--p", 0.4, "--seed", 3)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"source": 2}))
    code, out, _ = _run(["solve", "--problem", graph, "--solver", "sssp", "--config", cfg], capsys)
    from oracles import dijkstra
    g = parse_edge_list(graph)
    assert code == 0 and json.loads(out)["best_solution"] == dijkstra(g.n, g.edges, 2)


def test_load_result_rejects_unknown_fields(tmp_path):
    out = tmp_path / "r.json"
    main(["solve", "--problem", str(TWO), "--solver", "anneal", "--output", str(out)])
    doc = load_result(out)
    doc["surprise"] = 1
    out.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="surprise"):
        load_result(out)
    del doc["surprise"], doc["seed"]
    out.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="seed"):
        load_result(out)
    doc["schema"] = "spikeopt.result/999"
    out.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_result(out)


def _suite(tmp_path):
    q = _gen(tmp_path, "qubo", "q.qubo", "--n", 6, "--seed", 2)
    tsp = _gen(tmp_path, "tsp", "t.tsp", "--n", 4, "--seed", 2)
    suite = {"runs": [
        {"problem": "two.qubo", "solver": "anneal", "budget": 200, "target": -2},
        {"problem": q.name, "solver": "swarm", "config": {"m": 2}, "budget": 200},
        {"problem": tsp.name, "solver": "aco", "budget": 10},
        {"problem": "missing.qubo", "solver": "anneal"},
    ], "seeds": [0, 1, 2, 3, 4]}
    (tmp_path / "two.qubo").write_bytes(TWO.read_bytes())
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(suite))
    return path


def test_bench_rows_failures_and_parallelism(tmp_path):
    suite = _suite(tmp_path)
    one, eight = tmp_path / "one.csv", tmp_path / "eight.csv"
    assert main(["bench", str(suite), "--output", str(one)]) == 0
    assert main(["bench", str(suite), "--jobs", "8", "--output", str(eight)]) == 0
    assert one.read_bytes() == eight.read_bytes()
    assert one.with_suffix(".json").read_bytes() == eight.with_suffix(".json").read_bytes()
    rows = list(csv.DictReader(one.open()))
    assert list(rows[0]) == BENCH_COLUMNS
    good = [r for r in rows if r["problem"] != "missing.qubo"]
    bad = [r for r in rows if r["problem"] == "missing.qubo"]
    assert len(good) == 15 and len(bad) == 5
    assert all(r["status"] == "error" and r["error"].startswith("exit 2") for r in bad)
    assert all(r["status"] == "ok" and r["best_objective"] == "-2.0" for r in good if r["problem"] == "two.qubo")
    summary = json.loads(one.with_suffix(".json").read_text())
    assert summary[0]["success_rate"] == 1.0 and summary[3]["errors"] == 5


def test_convert_roundtrip(tmp_path, capsys):
    q = _gen(tmp_path, "qubo", "q.qubo", "--n", 7, "--seed", 5)
    ising = tmp_path / "q.ising.json"
    assert main(["convert", "--problem", str(q), "--output", str(ising)]) == 0
    back = tmp_path / "back.qubo"
    assert main(["convert", "--problem", str(ising), "--output", str(back)]) == 0
    a, b = parse_qubo(q), parse_qubo(back)
    j = parse_ising(ising)
    for x in itertools.product((0, 1), repeat=7):
        assert abs(qubo_objective(a, x) - ising_energy(j, 2 * np.array(x) - 1)) <= 1e-9
        # the text format carries no offset, so the round trip agrees up to that constant
        assert abs(qubo_objective(a, x) - qubo_objective(b, x) - (qubo_objective(a, [0] * 7)
                                                                  - qubo_objective(b, [0] * 7))) <= 1e-9
    zero = tmp_path / "z.qubo"
    write_qubo(QuboInstance(np.zeros((3, 3))), zero)
    code, out, _ = _run(["convert", "--problem", zero], capsys)
    doc = json.loads(out)
    assert code == 0 and not np.any(doc["j"]) and not np.any(doc["h"]) and doc["offset"] == 0
    code2, out2, _ = _run(["convert", "--problem", zero], capsys)
    assert out2 == out


def test_generate_validation(tmp_path, capsys):
    assert _run(["generate", "--kind", "qubo", "--n", 3], capsys)[0] == EXIT_CONFIG
    assert _run(["generate", "--kind", "qubo", "--n", 0, "--output", tmp_path / "x"], capsys)[0] == EXIT_CONFIG


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "spikeopt", "solve", "--problem", str(TWO), "--solver", "anneal",
                          "--budget", "100"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["best_objective"] == -2
    res = subprocess.run([sys.executable, "-m", "spikeopt", "oracle", "--problem", "nope.qubo"],
                         capture_output=True, text=True)
    assert res.returncode == EXIT_PARSE
