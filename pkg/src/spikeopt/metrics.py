"""Energy estimates from spike traces and space/time complexity of networks."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from graphlib import CycleError, TopologicalSorter
from pathlib import Path

import numpy as np

from .core import Network, SpikeTrace

SCHEMA_ENERGY = "spikeopt.energy-model/1"


@dataclass(frozen=True)
class EnergyModel:
    """Component energy model; powers in watts, energies in joules.

    Only ``p_static`` is non-zero by default. Realistic numbers depend on the
    hardware and must be supplied by the caller.
    """
    p_static: float = 1e-3
    e_source_spike: float = 0.0
    p_neuron_idle: float = 0.0
    e_spike_emit: float = 0.0
    e_spike_transmit: float = 0.0
    e_synaptic_event: float = 0.0
    p_plasticity: float = 0.0
    tick_duration: float = 1e-3

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be a finite non-negative number")

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_ENERGY, **asdict(self)}

    @classmethod
    def from_dict(cls, doc: dict) -> "EnergyModel":
        doc = dict(doc)
        schema = doc.pop("schema", SCHEMA_ENERGY)
        if schema != SCHEMA_ENERGY:
            raise ValueError(f"unsupported energy model schema {schema!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown energy model field(s): {sorted(unknown)}")
        return cls(**doc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path) -> "EnergyModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class EventCounts:
    ticks: int
    neurons: int
    spikes: int
    deliveries: int
    source_spikes: int
    plasticity_ticks: int = 0


@dataclass(frozen=True)
class EnergyBreakdown:
    static: float
    neuron_idle: float
    spike_emit: float
    spike_transmit: float
    synaptic_events: float
    source_spikes: float
    plasticity: float
    total: float

    def components(self) -> list[float]:
        return [self.static, self.neuron_idle, self.spike_emit, self.spike_transmit,
                self.synaptic_events, self.source_spikes, self.plasticity]

    def to_dict(self) -> dict:
        return asdict(self)


def count_synaptic_ops(trace: SpikeTrace, network: Network) -> tuple[int, int]:
    """(spikes, deliveries): every spike is delivered once per outgoing synapse."""
    if trace.n_neurons != network.n:
        raise ValueError(f"trace has {trace.n_neurons} neurons, network has {network.n}")
    if trace.neurons.size == 0:
        return 0, 0
    deg = network.out_degree()
    return int(trace.neurons.size), int(deg[trace.neurons].sum())


def energy_from_counts(counts: EventCounts, model: EnergyModel) -> EnergyBreakdown:
    seconds = counts.ticks * model.tick_duration
    parts = [
        model.p_static * seconds,
        model.p_neuron_idle * counts.neurons * seconds,
        counts.spikes * model.e_spike_emit,
        counts.deliveries * model.e_spike_transmit,
        counts.deliveries * model.e_synaptic_event,
        counts.source_spikes * model.e_source_spike,
        model.p_plasticity * counts.plasticity_ticks * model.tick_duration,
    ]
    total = 0.0
    for p in parts:
        total += p
    return EnergyBreakdown(*parts, total)


def estimate_energy(trace: SpikeTrace, network: Network, model: EnergyModel | None = None,
                    ticks: int | None = None, plasticity_ticks: int = 0) -> EnergyBreakdown:
    """Energy of a run from its trace; ``ticks`` defaults to the trace length."""
    model = model or EnergyModel()
    spikes, deliveries = count_synaptic_ops(trace, network)
    counts = EventCounts(trace.length if ticks is None else int(ticks), network.n, spikes, deliveries,
                         trace.source_spikes, plasticity_ticks)
    return energy_from_counts(counts, model)


# -- complexity ------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexityReport:
    neurons: int
    synapses: int
    setup_time: tuple[str, int]
    run_time: dict | None

    def to_dict(self) -> dict:
        return {"neurons": self.neurons, "synapses": self.synapses,
                "setup_time": {"class": self.setup_time[0], "count": self.setup_time[1]},
                "run_time": self.run_time}


def _longest(order, preds, inputs, delay):
    """Best (metric, hops, delay) ending at each node, over paths from an input."""
    best: dict[int, tuple[int, int, int]] = {}
    for v in order:
        cands = [(0, 0, 0)] if v in inputs else []
        for u in preds.get(v, ()):
            if u in best:
                m, h, d = best[u]
                w = delay[(u, v)]
                cands.append((m + 1 + w, h + 1, d + w))
        if cands:
            best[v] = max(cands)
    return best


def complexity(network: Network, inputs=None, outputs=None) -> ComplexityReport:
    """Neuron/synapse counts plus the longest input -> output path.

    The path metric is hops + summed delays. It is exact when the part of the
    network reachable from the inputs is acyclic; otherwise back edges found
    by a depth-first search are dropped and the result is a lower bound
    (``exact`` is False).
    """
    syns = network.synapses
    n_syn = len(syns)
    setup = ("O(N+S)", network.n + n_syn)
    if not inputs or not outputs:
        return ComplexityReport(network.n, n_syn, setup, None)
    inputs, outputs = set(int(i) for i in inputs), set(int(o) for o in outputs)
    delay = {(s.pre, s.post): s.delay for s in syns}
    succ: dict[int, list[int]] = {}
    for s in syns:
        succ.setdefault(s.pre, []).append(s.post)
    # restrict to nodes reachable from the inputs
    seen, stack = set(inputs), list(inputs)
    while stack:
        u = stack.pop()
        for v in succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    edges = [(u, v) for (u, v) in delay if u in seen and v in seen]
    exact = True
    preds: dict[int, list[int]] = {}
    for u, v in edges:
        preds.setdefault(v, []).append(u)
    try:
        order = list(TopologicalSorter({v: preds.get(v, []) for v in seen}).static_order())
    except CycleError:
        exact = False
        keep = _acyclic_edges(sorted(seen), succ, seen, inputs)
        preds = {}
        for u, v in keep:
            preds.setdefault(v, []).append(u)
        order = list(TopologicalSorter({v: preds.get(v, []) for v in seen}).static_order())
    best = _longest(order, preds, inputs, delay)
    reached = [best[o] for o in outputs if o in best]
    if not reached:
        return ComplexityReport(network.n, n_syn, setup,
                                {"hops": None, "delay": None, "metric": None, "exact": exact})
    m, h, d = max(reached)
    return ComplexityReport(network.n, n_syn, setup, {"hops": h, "delay": d, "metric": m, "exact": exact})


def _acyclic_edges(nodes, succ, seen, inputs):
    """Edges of the reachable subgraph minus DFS back edges (iterative DFS)."""
    color: dict[int, int] = {}
    keep = []
    roots = sorted(inputs) + [v for v in nodes if v not in inputs]
    for root in roots:
        if root in color:
            continue
        color[root] = 1
        stack = [(root, iter(sorted(succ.get(root, []))))]
        while stack:
            u, it = stack[-1]
            for v in it:
                if v not in seen:
                    continue
                c = color.get(v, 0)
                if c == 1:
                    continue  # back edge
                keep.append((u, v))
                if c == 0:
                    color[v] = 1
                    stack.append((v, iter(sorted(succ.get(v, [])))))
                    break
            else:
                color[u] = 2
                stack.pop()
    return keep
