from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bfs_grid, dijkstra
from spikeopt.problems import ParseError, generators
from spikeopt.problems.io import BoundsError
from spikeopt.wavefront import (
    UNREACHABLE,
    GridWorld,
    WeightedGraph,
    build_graph_network,
    parse_edge_list,
    parse_grid,
    plan_path,
    shortest_paths,
    sssp,
    write_edge_list,
)


def _single_fire(trace):
    assert np.all(np.bincount(trace.neurons, minlength=trace.n_neurons) <= 1)


def test_chain_structure_and_times():
    g = WeightedGraph(3, ((0, 1, 2), (1, 2, 3)))
    net = build_graph_network(g)
    assert net.n == 3 and sorted(s.delay for s in net.synapses) == [2, 3]
    assert all(p.refractory > g.total_weight() for p in net.params)
    assert shortest_paths(g, 0).to_list() == [0, 2, 5]


def test_single_node_and_isolated():
    net = build_graph_network(WeightedGraph(1, ()))
    assert net.n == 1 and net.params[0].refractory > 0
    table = shortest_paths(WeightedGraph(3, ((0, 1, 4),)), 0)
    assert table.to_list() == [0, 4, None] and table.times[2] == UNREACHABLE
    assert table.reachable().tolist() == [True, True, False]


def test_graph_validation():
    with pytest.raises(ValueError):
        WeightedGraph(2, ((0, 0, 1),))
    with pytest.raises(ValueError):
        WeightedGraph(2, ((0, 1, 0),))
    with pytest.raises(ValueError):
        WeightedGraph(2, ((0, 1, 1.5),))
    with pytest.raises(ValueError):
        WeightedGraph(2, ((0, 2, 1),))


@given(st.integers(2, 30), st.floats(0.05, 0.5), st.integers(0, 2 ** 20))
@settings(max_examples=25, deadline=None)
def test_delay_multiset_and_dijkstra(n, p, seed):
    edges = generators.random_weighted_graph(n, p, seed)
    g = WeightedGraph(n, tuple(edges))
    net = build_graph_network(g)
    assert Counter(s.delay for s in net.synapses) == Counter(w for _, _, w in edges)
    src = seed % n
    traces = []
    table = sssp(net, src, traces)
    _single_fire(traces[0])
    ref = dijkstra(n, edges, src)
    assert table.to_list() == ref


def test_undirected_and_parallel_edges():
    g = WeightedGraph(3, ((0, 1, 5), (0, 1, 2), (2, 1, 1)), directed=False)
    assert shortest_paths(g, 2).to_list() == [3, 1, 0]


def test_grid_examples():
    world = GridWorld(3, 3, frozenset(), (0, 0), (2, 2))
    path = plan_path(world)
    assert len(path) - 1 == 4 and path[0] == (0, 0) and path[-1] == (2, 2)
    walled = parse_grid("S..\n.##\n.#G\n")
    assert plan_path(walled) is None
    with pytest.raises(ValueError):
        GridWorld(3, 3, frozenset({(0, 0)}), (0, 0), (2, 2))


def test_grid_tie_order_north_first():
    # from S both E and S neighbours lie on shortest paths; E wins (N is off-grid)
    path = plan_path(parse_grid("S.\n.G\n"))
    assert path == [(0, 0), (0, 1), (1, 1)]


def _check_path(world, path):
    for a, b in zip(path, path[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
        assert world.free(a) and world.free(b)
    assert path[0] == world.start and path[-1] == world.goal


@pytest.mark.parametrize("seed", range(8))
def test_mazes_match_bfs(seed):
    text = generators.random_maze(20, 15, seed)
    world = parse_grid(text)
    traces = []
    path = plan_path(world, traces)
    ref = bfs_grid(text.split(), world.start, world.goal)
    _single_fire(traces[0])
    if ref is None:
        assert path is None
    else:
        assert len(path) - 1 == ref
        _check_path(world, path)


def test_grid_parse_errors():
    with pytest.raises(ParseError):
        parse_grid("")
    with pytest.raises(ParseError):
        parse_grid("S.S\n..G\n")
    with pytest.raises(ParseError):
        parse_grid("...\n..G\n")


def test_edge_list_roundtrip_and_errors(tmp_path):
    g = WeightedGraph(5, tuple(generators.random_weighted_graph(5, 0.5, 1)))
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    assert parse_edge_list(path) == g
    bad = tmp_path / "b.edges"
    for text, err in (("", ParseError), ("2 1\n0 1 x\n", ParseError), ("2 1\n0 5 1\n", BoundsError),
                      ("2 2\n0 1 1\n", ParseError), ("2 1\n0 1 0\n", ParseError)):
        bad.write_text(text)
        with pytest.raises(err):
            parse_edge_list(bad)


def test_repeated_queries_on_fresh_networks():
    edges = generators.random_weighted_graph(15, 0.3, 4)
    g = WeightedGraph(15, tuple(edges))
    for src in range(15):
        assert shortest_paths(g, src).to_list() == dijkstra(15, edges, src)
