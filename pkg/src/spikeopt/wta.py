"""Winner-take-all energy networks for constraint satisfaction and the TSP.

An :class:`EnergyNet` assigns every binary state ``x`` the energy

    E(x) = sum_{i != j} W_ij x_i x_j - sum_i b_i x_i

and is realized by stochastic neurons that sample ``p(x) ~ exp(-E(x)/T)``:
a neuron that spikes holds its state bit at 1 for ``hold`` ticks (it is
refractory for ``hold - 1`` ticks), each spike drives a rectangular
post-synaptic current of the same length, and an eligible neuron fires with
probability ``sigmoid(u - log(hold))`` where ``u = (b_i - 2 sum_j W_ij x_j) / T``.

Builders below speak in *pair energies*: the energy added when both ends of a
pair are active (``2 W_ij``). A synapse "weight" in the usual sense is the
negated pair energy, so an inhibitory link of weight ``-c`` costs ``c``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .anneal import AnnealConfig
from .core import (
    STREAM_GATE,
    STREAM_NOISE,
    CounterStream,
    Network,
    NeuronKind,
    NeuronParams,
    NoiseSchedule,
    SpikeTrace,
    TraceRecorder,
    hold_state,
    sample_noise,
)
from .problems import CspInstance, QuboInstance, TspInstance, tour_length

MAX_ENUMERATION = 20
DEFAULT_HOLD = 30


def energy(state, weights, bias) -> float:
    x = np.asarray(state, dtype=float)
    w = np.asarray(weights, dtype=float)
    b = np.asarray(bias, dtype=float)
    if w.shape != (x.size, x.size) or b.shape != (x.size,):
        raise ValueError("state, weights and bias dimensions do not match")
    return float(x @ w @ x - b @ x)


def energies(states, weights, bias) -> np.ndarray:
    xs = np.asarray(states, dtype=float)
    return np.einsum("si,ij,sj->s", xs, weights, xs) - xs @ np.asarray(bias, dtype=float)


def all_states(n: int) -> np.ndarray:
    """Every binary state, in lexicographic order (first neuron most significant)."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8).reshape(-1, n)


def state_index(x: np.ndarray) -> np.ndarray:
    """Row index of ``x`` (or each row of a 2-D array) in :func:`all_states`."""
    x = np.asarray(x, dtype=np.int64)
    powers = 1 << np.arange(x.shape[-1] - 1, -1, -1, dtype=np.int64)
    return x @ powers


@dataclass
class EnergyNet:
    weights: np.ndarray
    bias: np.ndarray
    temperature: float = 1.0
    hold: int = DEFAULT_HOLD
    network: Network | None = field(default=None, repr=False)
    copies: int = 1

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=float)
        self.bias = np.array(self.bias, dtype=float)
        n = self.bias.size
        if self.weights.shape != (n, n):
            raise ValueError("weights must be n x n")
        if not np.allclose(self.weights, self.weights.T, rtol=0, atol=0):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(self.weights) != 0):
            raise ValueError("weights must have a zero diagonal")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.hold < 1:
            raise ValueError("hold must be >= 1")

    @property
    def n(self) -> int:
        return self.bias.size

    def energy(self, state) -> float:
        return energy(state, self.weights, self.bias)

    def normalizer(self) -> float:
        """Partition function z, by enumeration."""
        return float(np.exp(self._log_weights()).sum())

    def _log_weights(self) -> np.ndarray:
        if self.n > MAX_ENUMERATION:
            raise ValueError(f"{self.n} neurons is too many to enumerate (max {MAX_ENUMERATION})")
        return -energies(all_states(self.n), self.weights, self.bias) / self.temperature

    def distribution(self) -> np.ndarray:
        """Boltzmann probability of every state, in :func:`all_states` order."""
        lw = self._log_weights()
        p = np.exp(lw - lw.max())
        return p / p.sum()


def energy_to_qubo(net: EnergyNet) -> QuboInstance:
    """QUBO whose objective equals the net's energy on every state."""
    q = net.weights.copy()
    q[np.diag_indices(net.n)] = -net.bias
    return QuboInstance(q)


def boltzmann_prob(state, net: EnergyNet) -> float:
    lw = net._log_weights()
    shift = lw.max()
    z = np.exp(lw - shift).sum()
    return float(np.exp(-net.energy(state) / net.temperature - shift) / z)


def build_energy_network(net: EnergyNet, seed: int = 0, copies: int = 1, sequential: bool = False) -> Network:
    """Spiking sampler for ``net``; ``copies`` independent chains side by side.

    With ``sequential`` every sampling step is split into ``n`` sub-ticks and
    hold, refractory and PSP lengths are stretched by ``n``; use
    :func:`sequential_gate` so that neuron ``j`` of each chain only switches on
    sub-ticks ``t = j (mod n)``. Neurons then update one at a time against
    the current state of the others, which makes the chain sample the
    Boltzmann distribution exactly. Plain synchronous updates only
    approximate it: two coupled neurons may switch on the same tick.
    """
    t, hold = net.temperature, net.hold
    n = net.n
    span = hold * n if sequential else hold
    thr = float(np.log(hold))
    network = Network(seed=seed, psp_duration=span)
    for _ in range(copies):
        for i in range(n):
            network.add_neuron(NeuronParams(threshold=thr, reset=thr - 1.0, decay=1.0,
                                            refractory=span - 1, kind=NeuronKind.STOCHASTIC,
                                            bias=float(net.bias[i] / t)))
    rows, cols = np.nonzero(net.weights)
    for c in range(copies):
        base = c * n
        for i, j in zip(rows.tolist(), cols.tolist()):
            network.connect(base + i, base + j, float(-2.0 * net.weights[i, j] / t))
    net.network = network
    net.copies = copies
    return network


def sequential_gate(n: int, copies: int, t: int):
    """Gate for a sequential sampler: only neuron ``t mod n`` of each chain may spike."""
    allowed = np.zeros(n * copies, dtype=bool)
    allowed[t % n::n] = True

    def gate(spiked, refractory):
        return spiked & allowed

    return gate


def sample_counts(net: EnergyNet, samples: int, seed: int = 0, chains: int = 16,
                  burn_in: int = 100, stride: int = 1, sequential: bool = True) -> np.ndarray:
    """Histogram of tau-hold readouts over all 2**n states.

    ``chains`` independent copies run in one network. After ``burn_in``
    sampling steps every chain is read out once every ``stride`` steps until
    ``samples`` readouts are collected. Consecutive readouts are strongly
    correlated, so a stride of a few ``hold`` lengths buys far more
    independent samples per readout. A sampling step is one tick, or ``n``
    sub-ticks when ``sequential``.
    """
    if net.n > MAX_ENUMERATION:
        raise ValueError("too many neurons to histogram every state")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    network = build_energy_network(net, seed, chains, sequential)
    sub = net.n if sequential else 1
    span = net.hold * sub
    rounds = -(-samples // chains)
    counts = np.zeros(2 ** net.n, dtype=np.int64)
    powers = 1 << np.arange(net.n - 1, -1, -1, dtype=np.int64)

    def advance(steps):
        for _ in range(steps * sub):
            gate = sequential_gate(net.n, chains, network.tick) if sequential else None
            network.step(gate=gate)

    advance(burn_in)
    taken = 0
    for _ in range(rounds):
        advance(stride)
        x = hold_state(network.last_spike, network.tick - 1, span).reshape(chains, net.n)
        idx = x @ powers
        if taken + chains > samples:
            idx = idx[: samples - taken]
        counts += np.bincount(idx, minlength=counts.size)
        taken += idx.size
    return counts


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# -- WTA-structured energy nets -----------------------------------------------

@dataclass(frozen=True)
class WtaSubnetwork:
    members: tuple[int, ...]
    inhibition_weight: float
    k: int = 1

    def __post_init__(self):
        if not self.inhibition_weight < 0:
            raise ValueError("inhibition weight must be negative")
        if not 1 <= self.k <= len(self.members):
            raise ValueError("k must lie in [1, |members|]")

    def active_ok(self, state) -> bool:
        return int(np.asarray(state)[list(self.members)].sum()) <= self.k


class _PairBuilder:
    """Accumulates pair energies and biases into symmetric W / b."""

    def __init__(self, n: int):
        self.w = np.zeros((n, n))
        self.b = np.zeros(n)

    def pair(self, i: int, j: int, pair_energy: float):
        self.w[i, j] += pair_energy / 2.0
        self.w[j, i] += pair_energy / 2.0

    def wta(self, members, inhibition: float, k: int = 1):
        """k-of-n penalty (inhibition/2) * (sum x - k)**2 up to a constant."""
        for a, b in itertools.combinations(members, 2):
            self.pair(a, b, inhibition)
        self.b[list(members)] += inhibition * (2 * k - 1) / 2.0


@dataclass
class CspNet:
    energy_net: EnergyNet
    instance: CspInstance
    subnetworks: list[WtaSubnetwork]
    constraint_penalty: float
    index: dict  # (variable, value) -> neuron

    def decode(self, last_spike: np.ndarray):
        """Per-variable value of the most recent spike (None if never spiked)."""
        out = []
        for var, sub in enumerate(self.subnetworks):
            ls = last_spike[list(sub.members)]
            if ls.max() < 0:
                out.append(None)
            else:
                out.append(self.instance.domains[var][int(np.argmax(ls))])
        return out


def build_csp_network(inst: CspInstance, penalty: float = 2.0, inhibition: float = 2.0,
                      temperature: float = 0.5, hold: int = DEFAULT_HOLD) -> CspNet:
    """One neuron per (variable, value), a WTA group per variable.

    Forbidden value pairs across variables get an inhibitory link of weight
    ``-penalty``; the within-variable WTA links have weight ``-inhibition``
    and the matching excitatory bias lets the winner change.
    """
    for i, d in enumerate(inst.domains):
        if not d:
            raise ValueError(f"variable {i} has an empty domain")
    index = {}
    subs = []
    for var, dom in enumerate(inst.domains):
        ids = []
        for val in dom:
            index[(var, val)] = len(index)
            ids.append(index[(var, val)])
        subs.append(WtaSubnetwork(tuple(ids), -inhibition))
    pb = _PairBuilder(len(index))
    for sub in subs:
        pb.wta(sub.members, inhibition)
    for (a, b), pairs in inst.constraints.items():
        for va, vb in sorted(pairs):
            pb.pair(index[(a, va)], index[(b, vb)], penalty)
    en = EnergyNet(pb.w, pb.b, temperature, hold)
    return CspNet(en, inst, subs, penalty, index)


@dataclass
class CspResult:
    assignment: list
    success: bool
    violations: int
    tick: int
    spikes_total: int
    synaptic_events: int
    source_spikes: int
    ticks_run: int
    neurons: int
    trace: SpikeTrace | None = field(default=None, repr=False)


def _forbidden_table(net: CspNet):
    inst = net.instance
    width = max(len(d) for d in inst.domains)
    keys = sorted(inst.constraints)
    table = np.zeros((len(keys), width + 1, width + 1), dtype=bool)  # last row/col: undecided
    for c, (a, b) in enumerate(keys):
        pos_a = {v: i for i, v in enumerate(inst.domains[a])}
        pos_b = {v: i for i, v in enumerate(inst.domains[b])}
        for va, vb in inst.constraints[(a, b)]:
            table[c, pos_a[va], pos_b[vb]] = True
    scope = np.array(keys, dtype=np.int64).reshape(-1, 2)
    return table, scope, width


def _winners(last_spike: np.ndarray, groups: np.ndarray, valid: np.ndarray, width: int) -> np.ndarray:
    """Argmax of last-spike tick per group (lowest index on ties); ``width`` if silent."""
    ls = np.where(valid, last_spike[groups], -2)
    win = np.argmax(ls, axis=1)
    silent = ls.max(axis=1) < 0
    return np.where(silent, width, win)


def _group_matrix(subs) -> tuple[np.ndarray, np.ndarray, int]:
    width = max(len(s.members) for s in subs)
    groups = np.zeros((len(subs), width), dtype=np.int64)
    valid = np.zeros((len(subs), width), dtype=bool)
    for g, s in enumerate(subs):
        groups[g, : len(s.members)] = s.members
        valid[g, : len(s.members)] = True
    return groups, valid, width


class _WtaRunner:
    """Tick loop for WTA-structured nets with an optional hard-inhibition gate.

    Under hard inhibition a group admits a new spike only while fewer than
    ``k`` of its members are still held; surplus proposals on one tick are
    dropped in random-priority order. Every tau-hold readout then has at most
    ``k`` active members per group.
    """

    def __init__(self, energy_net: EnergyNet, subnetworks, config: AnnealConfig, seed: int,
                 hard: bool = True, record: bool = False):
        self.en = energy_net
        self.cfg = config
        self.net = build_energy_network(energy_net, seed)
        self.noise_rng = CounterStream(seed, STREAM_NOISE)
        self.gate_rng = CounterStream(seed, STREAM_GATE)
        self.groups, self.valid, _ = _group_matrix(subnetworks)
        self.k = np.array([s.k for s in subnetworks], dtype=np.int64)
        self.hard = hard
        self.rec = TraceRecorder(self.net) if record else None
        self._deg = self.net.out_degree()
        self.spikes = self.events = self.sources = 0

    def _gate(self, t: int):
        groups, valid, hold = self.groups, self.valid, self.en.hold

        def gate(spiked, refractory):
            prop = spiked[groups] & valid
            if not prop.any():
                return spiked
            last = self.net.last_spike[groups]
            held = ((last >= 0) & (last > t - hold) & valid).sum(axis=1)
            room = np.maximum(self.k - held, 0)
            over = prop.sum(axis=1) > room
            if not over.any():
                return spiked
            prio = np.where(prop, self.gate_rng.uniforms(t, self.net.n)[groups], np.inf)
            ranks = np.argsort(np.argsort(prio, axis=1, kind="stable"), axis=1, kind="stable")
            drop = prop & (ranks >= room[:, None])
            out = spiked.copy()
            out[groups[drop]] = False
            return out

        return gate

    def tick(self) -> np.ndarray:
        net = self.net
        t = net.tick
        forced = sample_noise(self.cfg.noise, t, self.noise_rng, net.n)
        refr = net.refractory_remaining > 0
        ids = net.step(forced=forced, gate=self._gate(t) if self.hard else None)
        self.spikes += ids.size
        if ids.size:
            self.events += int(self._deg[ids].sum())
        src = int(np.count_nonzero(np.isin(forced, ids) & ~refr[forced])) if forced.size else 0
        self.sources += src
        if self.rec is not None:
            self.rec.record(t, ids, src)
        return ids


def _default_wta_config(ticks: int) -> AnnealConfig:
    return AnnealConfig(noise=NoiseSchedule(0.0, 1.0), ticks=ticks)


def solve_csp(net: CspNet, config: AnnealConfig | None = None, seed: int = 0, hard: bool = True,
              record: bool = False) -> CspResult:
    """Run the CSP network until the decoded assignment violates nothing.

    Decaying noise from ``config.noise`` adds forced spikes on top of the
    sampler's own stochasticity. On budget exhaustion the assignment with the
    fewest violations seen is returned with ``success=False``.
    """
    config = config or _default_wta_config(100_000)
    run = _WtaRunner(net.energy_net, net.subnetworks, config, seed, hard, record)
    table, scope, width = _forbidden_table(net)
    groups, valid = run.groups, run.valid
    n_cons = scope.shape[0]
    rows = np.arange(n_cons)
    best_v, best_assign, best_tick = np.inf, None, 0
    for _ in range(config.ticks):
        t = run.net.tick
        ids = run.tick()
        if ids.size == 0 and best_assign is not None:
            continue
        win = _winners(run.net.last_spike, groups, valid, width)
        undecided = int(np.count_nonzero(win == width))
        v = int(table[rows, win[scope[:, 0]], win[scope[:, 1]]].sum()) if n_cons else 0
        v += undecided * (n_cons + 1)
        if v < best_v:
            best_v, best_tick = v, t
            best_assign = net.decode(run.net.last_spike)
            if v == 0:
                break
    if best_assign is None:
        best_assign = [None] * net.instance.n
    return CspResult(best_assign, best_v == 0, int(best_v) if np.isfinite(best_v) else -1, best_tick,
                     run.spikes, run.events, run.sources, run.net.tick, run.net.n,
                     run.rec.trace() if run.rec is not None else None)


# -- TSP ----------------------------------------------------------------------

@dataclass
class TspNet:
    energy_net: EnergyNet
    instance: TspInstance
    subnetworks: list[WtaSubnetwork]
    excitation_scale: float
    city_penalty: float

    @property
    def n(self) -> int:
        return self.instance.n

    def neuron(self, step: int, city: int) -> int:
        return step * self.n + city


def default_city_penalty(n: int, excitation_scale: float) -> float:
    return n * excitation_scale + 1.0


def build_tsp_network(inst: TspInstance, excitation_scale: float = 1.0, city_penalty: float | None = None,
                      temperature: float = 2.5, hold: int = DEFAULT_HOLD) -> TspNet:
    """N x N neurons: neuron (k, i) proposes city i at tour step k.

    Each step is a WTA group (links of weight ``-city_penalty``); the same
    city at two different steps is linked with weight ``-city_penalty``; city
    i at step k and city j at step k+1 (cyclically) are linked with the
    excitatory weight ``excitation_scale * (d_max - d_ij) / d_max``.
    """
    n = inst.n
    if n < 2:
        raise ValueError("a tour needs at least 2 cities")
    if city_penalty is None:
        city_penalty = default_city_penalty(n, excitation_scale)
    d = inst.dist
    dmax = d.max()
    exc = excitation_scale * (dmax - d) / dmax if dmax > 0 else np.full_like(d, excitation_scale)
    pb = _PairBuilder(n * n)
    subs = []
    for k in range(n):
        members = tuple(k * n + i for i in range(n))
        subs.append(WtaSubnetwork(members, -city_penalty))
        pb.wta(members, city_penalty)
    for i in range(n):
        pb.wta([k * n + i for k in range(n)], city_penalty)
    steps = [(k, (k + 1) % n) for k in range(n)] if n > 2 else [(0, 1)]
    for k, k2 in steps:
        for i in range(n):
            for j in range(n):
                if i != j:
                    pb.pair(k * n + i, k2 * n + j, -exc[i, j])
    en = EnergyNet(pb.w, pb.b, temperature, hold)
    return TspNet(en, inst, subs, excitation_scale, city_penalty)


def decode_from_last_spike(last_spike: np.ndarray, net: TspNet):
    """Tour proposed by the most recent spike of each step group, or None."""
    n = net.n
    ls = np.asarray(last_spike).reshape(n, n)
    if np.any(ls.max(axis=1) < 0):
        return None
    tour = np.argmax(ls, axis=1)
    if np.unique(tour).size != n:
        return None
    return [int(c) for c in tour]


def decode_tour(trace: SpikeTrace, net: TspNet, t: int):
    """Decode at tick ``t`` from a trace; returns a tour or None (infeasible)."""
    n = net.n
    last = np.full(n * n, -1, dtype=np.int64)
    if t >= trace.start:
        mask = trace.ticks <= t
        # records are tick-sorted, so the final write per neuron is its latest spike
        last[trace.neurons[mask]] = trace.ticks[mask]
    return decode_from_last_spike(last, net)


@dataclass
class TspResult:
    tour: list | None
    length: float
    feasible: bool
    tick: int
    feasible_decodes: int
    spikes_total: int
    synaptic_events: int
    source_spikes: int
    ticks_run: int
    neurons: int
    trace: SpikeTrace | None = field(default=None, repr=False)


def solve_tsp(net: TspNet, config: AnnealConfig | None = None, seed: int = 0,
              target: float | None = None, hard: bool = True, record: bool = False) -> TspResult:
    """Run the dynamics, decode every tick and keep the shortest feasible tour."""
    config = config or _default_wta_config(20_000)
    run = _WtaRunner(net.energy_net, net.subnetworks, config, seed, hard, record)
    n = net.n
    dist = net.instance.dist
    best_tour, best_len, best_tick = None, np.inf, 0
    feasible = 0
    last_ok = False
    for _ in range(config.ticks):
        t = run.net.tick
        ids = run.tick()
        if ids.size == 0 and t > 0:
            # nothing changed: the decode is the same as last tick
            feasible += last_ok
            continue
        ls = run.net.last_spike.reshape(n, n)
        tour = np.argmax(ls, axis=1)
        last_ok = bool(ls.max(axis=1).min() >= 0 and np.unique(tour).size == n)
        if not last_ok:
            continue
        feasible += 1
        length = float(dist[tour, np.roll(tour, -1)].sum())
        if length < best_len:
            best_tour, best_len, best_tick = [int(c) for c in tour], length, t
            if target is not None and best_len <= target:
                break
    if best_tour is not None:
        best_len = tour_length(net.instance, best_tour)
    return TspResult(best_tour, best_len, best_tour is not None, best_tick, feasible, run.spikes,
                     run.events, run.sources, run.net.tick, run.net.n,
                     run.rec.trace() if run.rec is not None else None)
