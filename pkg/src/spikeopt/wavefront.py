"""Shortest paths from spike wavefronts.

Each graph node is an integrate-and-fire neuron and each edge a synapse whose
delay equals the edge weight. Stimulating the source at tick 0 sends a wave
through the network; a neuron fires when the first spike reaches it and then
stays refractory for the rest of the run, so its firing tick is its distance
from the source.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Network, NeuronKind, NeuronParams, SpikeTrace, TraceRecorder
from .problems.io import BoundsError, ParseError

UNREACHABLE = -1
# tie order when descending the firing-time landscape
DIRECTIONS = (("N", -1, 0), ("E", 0, 1), ("S", 1, 0), ("W", 0, -1))


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, int], ...]
    directed: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        edges = tuple((int(u), int(v), int(w)) for u, v, w in self.edges)
        for (u, v, w), raw in zip(edges, self.edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if w < 1 or w != raw[2]:
                raise ValueError(f"edge weight {raw[2]!r} is not a positive integer")
        object.__setattr__(self, "edges", edges)

    def arcs(self) -> dict[tuple[int, int], int]:
        """Directed arcs with parallel edges merged to their lightest weight."""
        out: dict[tuple[int, int], int] = {}
        for u, v, w in self.edges:
            pairs = ((u, v),) if self.directed else ((u, v), (v, u))
            for a in pairs:
                out[a] = min(w, out.get(a, w))
        return out

    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges)


@dataclass(frozen=True)
class FiringTimeTable:
    times: np.ndarray  # first-spike tick per node, UNREACHABLE if silent
    source: int

    def __post_init__(self):
        if self.times[self.source] != 0:
            raise ValueError("source must fire at tick 0")

    def time(self, v: int) -> int | None:
        t = int(self.times[v])
        return None if t == UNREACHABLE else t

    def reachable(self) -> np.ndarray:
        return self.times != UNREACHABLE

    def to_list(self) -> list:
        return [self.time(v) for v in range(self.times.size)]


def build_graph_network(g: WeightedGraph) -> Network:
    """One IF neuron per node; one synapse per arc with delay = weight.

    The synaptic weight equals the threshold, so a single arriving spike
    fires its target. The refractory period exceeds the total edge weight,
    which bounds the run length, so every neuron fires at most once.
    """
    net = Network()
    params = NeuronParams(threshold=1.0, reset=0.0, refractory=g.total_weight() + 1, kind=NeuronKind.IF)
    net.add_neurons(g.n, params)
    for (u, v), w in sorted(g.arcs().items()):
        net.connect(u, v, 1.0, delay=w)
    return net


def run_wavefront(network: Network, source: int, max_ticks: int | None = None) -> SpikeTrace:
    """Fire ``source`` at the current tick and step until no spike is in flight."""
    if not 0 <= source < network.n:
        raise IndexError(f"source {source} outside 0..{network.n - 1}")
    if max_ticks is None:
        max_ticks = sum(s.delay for s in network.synapses) + 2
    rec = TraceRecorder(network)
    t = network.tick
    ids = network.step(forced=[source])
    rec.record(t, ids, 1)
    for _ in range(max_ticks):
        if network.quiescent():
            break
        t = network.tick
        rec.record(t, network.step())
    return rec.trace()


def sssp(network: Network, source: int, trace_out: list | None = None) -> FiringTimeTable:
    """Firing-time table of a wavefront from ``source`` (times relative to the stimulus).

    ``trace_out``, if given, receives the spike trace.
    """
    start = network.tick
    trace = run_wavefront(network, source)
    if trace_out is not None:
        trace_out.append(trace)
    times = np.full(network.n, UNREACHABLE, dtype=np.int64)
    # first spike per neuron; records are in tick order
    order = np.argsort(trace.ticks, kind="stable")
    nrn, tk = trace.neurons[order], trace.ticks[order]
    uniq, first = np.unique(nrn, return_index=True)
    times[uniq] = tk[first] - start
    return FiringTimeTable(times, source)


def shortest_paths(g: WeightedGraph, source: int) -> FiringTimeTable:
    return sssp(build_graph_network(g), source)


# -- grid planning -------------------------------------------------------------

@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    obstacles: frozenset
    start: tuple[int, int]
    goal: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "obstacles", frozenset(tuple(c) for c in self.obstacles))
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))
        for name in ("start", "goal"):
            r, c = getattr(self, name)
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValueError(f"{name} {(r, c)} is outside the grid")
            if (r, c) in self.obstacles:
                raise ValueError(f"{name} {(r, c)} is an obstacle")

    def free(self, cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width and (r, c) not in self.obstacles

    def cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.height) for c in range(self.width) if (r, c) not in self.obstacles]

    def graph(self) -> tuple[WeightedGraph, dict]:
        """Unit-weight 4-connected graph over free cells and the cell -> node map."""
        index = {cell: i for i, cell in enumerate(self.cells())}
        edges = []
        for (r, c), i in index.items():
            for rr, cc in ((r, c + 1), (r + 1, c)):
                j = index.get((rr, cc))
                if j is not None:
                    edges.append((i, j, 1))
        return WeightedGraph(len(index), tuple(edges), directed=False), index


def parse_grid(text: str) -> GridWorld:
    """ASCII map: '#' obstacle, 'S' start, 'G' goal, anything else free."""
    rows = [line.rstrip("\n") for line in text.splitlines() if line.strip()]
    if not rows:
        raise ParseError("empty grid")
    width = max(len(r) for r in rows)
    obstacles, start, goal = set(), None, None
    for r, line in enumerate(rows):
        for c, ch in enumerate(line.ljust(width, ".")):
            if ch == "#":
                obstacles.add((r, c))
            elif ch == "S":
                if start is not None:
                    raise ParseError("more than one 'S'", r + 1)
                start = (r, c)
            elif ch == "G":
                if goal is not None:
                    raise ParseError("more than one 'G'", r + 1)
                goal = (r, c)
    if start is None or goal is None:
        raise ParseError("grid needs one 'S' and one 'G'")
    return GridWorld(width, len(rows), frozenset(obstacles), start, goal)


def load_grid(path) -> GridWorld:
    text = Path(path).read_text()
    try:
        return parse_grid(text)
    except ParseError as exc:
        raise ParseError(str(exc), path=path) from None


def plan_path(world: GridWorld, trace_out: list | None = None) -> list[tuple[int, int]] | None:
    """Path from start to goal as a list of cells, or None if the goal is cut off.

    The wave starts at the goal; the path follows strictly decreasing firing
    times from the start, taking the first qualifying neighbour in N, E, S, W
    order.
    """
    g, index = world.graph()
    table = sssp(build_graph_network(g), index[world.goal], trace_out)
    t = table.time(index[world.start])
    if t is None:
        return None
    path = [world.start]
    cell = world.start
    while t > 0:
        for _, dr, dc in DIRECTIONS:
            nxt = (cell[0] + dr, cell[1] + dc)
            j = index.get(nxt)
            if j is not None and table.time(j) == t - 1:
                cell, t = nxt, t - 1
                path.append(cell)
                break
        else:  # pragma: no cover - impossible for a consistent table
            raise RuntimeError("firing times are not a distance field")
    return path


# -- edge-list files -----------------------------------------------------------

def parse_edge_list(path, directed: bool = True) -> WeightedGraph:
    """``n m`` header then ``u v w`` lines, nodes 0-indexed, integer weights."""
    lines = [(no, raw.split()) for no, raw in enumerate(Path(path).read_text().splitlines(), 1)
             if raw.strip() and not raw.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty file", path=path)
    no, head = lines[0]
    try:
        n, m = (int(x) for x in head)
    except ValueError:
        raise ParseError("header must be 'n m'", no, path) from None
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"header declares {m} edges, found {len(body)}", body[-1][0] if body else no, path)
    edges = []
    for no, toks in body:
        if len(toks) != 3:
            raise ParseError("expected 'u v w'", no, path)
        try:
            u, v, w = (int(x) for x in toks)
        except ValueError:
            raise ParseError("edge fields must be integers", no, path) from None
        if not (0 <= u < n and 0 <= v < n):
            raise BoundsError(f"edge ({u}, {v}) outside 0..{n - 1}", no, path)
        if w < 1:
            raise ParseError(f"weight {w} must be a positive integer", no, path)
        if u == v:
            raise ParseError(f"self-loop on node {u}", no, path)
        edges.append((u, v, w))
    return WeightedGraph(n, tuple(edges), directed)


def write_edge_list(g: WeightedGraph, path):
    out = [f"{g.n} {len(g.edges)}"] + [f"{u} {v} {w}" for u, v, w in g.edges]
    Path(path).write_text("\n".join(out) + "\n")
