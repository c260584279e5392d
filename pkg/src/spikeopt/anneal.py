"""Stochastic local search over LIF networks: QUBO annealing and 3-SAT.

Each binary variable is a neuron whose tau-hold readout is the variable's
value. Neurons integrate the couplings of the neurons that spiked on the
previous tick with a proportional leak, fire at threshold and reset to 0.
Decaying noise (probability ``mu * beta**t``) injects extra spikes, which
plays the role of the annealing temperature. After a neuron's readout bit
flips, further flips are blocked for a random number of ticks (a tabu
period), and ``flip_cap`` bounds how many bits may change on one tick.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import (
    STREAM_GATE,
    STREAM_NOISE,
    STREAM_TABU,
    CounterStream,
    Network,
    NeuronKind,
    NeuronParams,
    NoiseSchedule,
    TraceRecorder,
    hold_state,
    sample_noise,
)
from .problems import CnfFormula, QuboInstance, qubo_objective, qubo_objectives

CHECKPOINT_EVERY = 100


@dataclass(frozen=True)
class AnnealConfig:
    noise: NoiseSchedule = NoiseSchedule(0.05, 0.9999)
    ticks: int = 50_000
    tau: int = 1
    decay: float = 0.5
    threshold: float = 1.0
    refractory_range: tuple[int, int] = (1, 4)
    flip_cap: int | None = None
    clause_weight: float = 1.0 / 3.0

    def __post_init__(self):
        if isinstance(self.noise, dict):
            object.__setattr__(self, "noise", NoiseSchedule(**self.noise))
        lo, hi = (int(v) for v in self.refractory_range)
        object.__setattr__(self, "refractory_range", (lo, hi))
        if self.ticks < 1:
            raise ValueError("tick budget must be >= 1")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if lo < 0 or hi < lo:
            raise ValueError("refractory_range must satisfy 0 <= min <= max")
        if self.flip_cap is not None and self.flip_cap < 1:
            raise ValueError("flip_cap must be >= 1 or None")
        if not 0.0 <= self.decay <= 1.0:
            raise ValueError("decay must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["refractory_range"] = list(self.refractory_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnealConfig":
        return cls(**d)


@dataclass
class AnnealResult:
    best_solution: np.ndarray
    best_objective: float
    tick_found: int
    spikes_total: int
    objective_trajectory: list[float]
    synaptic_events: int = 0
    source_spikes: int = 0
    ticks_run: int = 0
    neurons: int = 0
    member_trajectories: list[list[float]] | None = None
    syncs: list | None = None
    trace: object = field(default=None, repr=False)

    def summary(self) -> dict:
        return {
            "best_solution": [int(v) for v in self.best_solution],
            "best_objective": float(self.best_objective),
            "tick_found": int(self.tick_found),
            "spikes_total": int(self.spikes_total),
            "synaptic_events": int(self.synaptic_events),
            "ticks_run": int(self.ticks_run),
        }


def stochastic_refractory(config: AnnealConfig, rng, size=None):
    """Tabu length drawn uniformly from ``config.refractory_range``.

    ``rng`` is a numpy Generator or, for vectorized use, an array of uniforms
    in [0, 1) (one per neuron).
    """
    lo, hi = config.refractory_range
    if isinstance(rng, np.ndarray):
        return lo + np.floor(rng * (hi - lo + 1)).astype(np.int64)
    return rng.integers(lo, hi + 1, size=size)


def _qubo_params(config: AnnealConfig, bias: float) -> NeuronParams:
    return NeuronParams(threshold=config.threshold, reset=0.0, decay=config.decay,
                        kind=NeuronKind.LIF_DECAY, bias=bias)


def build_qubo_network(inst: QuboInstance, config: AnnealConfig | None = None, seed: int = 0,
                       copies: int = 1) -> Network:
    """One neuron per variable; coupling synapses carry ``-Q_ij`` in both directions.

    The diagonal ``-Q_ii`` becomes a constant bias. ``copies`` lays out that
    many independent replicas side by side (block-diagonal).
    """
    config = config or AnnealConfig()
    net = Network(seed=seed)
    n = inst.n
    bias = -np.diag(inst.q)
    for _ in range(copies):
        for i in range(n):
            net.add_neuron(_qubo_params(config, float(bias[i])))
    rows, cols = np.nonzero(np.triu(inst.q, 1))
    for c in range(copies):
        base = c * n
        for i, j in zip(rows.tolist(), cols.tolist()):
            w = -float(inst.q[i, j])
            net.connect(base + i, base + j, w)
            net.connect(base + j, base + i, w)
    return net


class _Engine:
    """Tick loop shared by anneal, iterated_anneal, collaborative_solve and solve_sat.

    ``members`` is an (m, n) index array of readout neurons, one row per
    replica; ``objective`` maps an (m, n) 0/1 array to m values.
    """

    def __init__(self, network: Network, members: np.ndarray, objective, config: AnnealConfig,
                 seed: int, record: bool = False):
        self.net = network
        self.members = np.atleast_2d(members)
        self.m, self.n = self.members.shape
        self.objective = objective
        self.cfg = config
        self.seed = seed
        self.noise_rng = CounterStream(seed, STREAM_NOISE)
        self.tabu_rng = CounterStream(seed, STREAM_TABU)
        self.gate_rng = CounterStream(seed, STREAM_GATE)
        self.var_mask = np.zeros(network.n, dtype=bool)
        self.var_mask[self.members.ravel()] = True
        self.var_ids = np.flatnonzero(self.var_mask)
        self.lock_until = np.full(network.n, -1, dtype=np.int64)
        self.tabu_on = config.refractory_range[1] > 0
        self.recorder = TraceRecorder(network) if record else None
        self.spikes = 0
        self.events = 0
        self.sources = 0
        self._deg = network.out_degree()
        t0 = network.tick
        self.x = hold_state(network.last_spike, t0 - 1, config.tau)
        self.inject_on = np.empty(0, dtype=np.int64)
        self.inject_off = np.empty(0, dtype=np.int64)
        self.best_x = np.zeros((self.m, self.n), dtype=np.int8)
        self.best_f = np.full(self.m, np.inf)
        self.best_tick = np.zeros(self.m, dtype=np.int64)
        self.trajectories: list[list[float]] = [[] for _ in range(self.m)]

    def _gate(self, t: int):
        cfg = self.cfg
        x_prev = self.x

        def gate(spiked, refractory):
            last = np.where(spiked, t, self.net.last_spike)
            bits = (last >= 0) & (last > t - cfg.tau)
            flips = (bits != x_prev.astype(bool)) & self.var_mask
            if self.tabu_on:
                blocked = flips & (self.lock_until >= t)
                if blocked.any():
                    spiked = spiked ^ blocked
                    flips &= ~blocked
            if cfg.flip_cap is not None and flips.any():
                per = flips[self.members]
                counts = per.sum(axis=1)
                if np.any(counts > cfg.flip_cap):
                    prio = self.gate_rng.uniforms(t, self.net.n)[self.members]
                    prio = np.where(per, prio, np.inf)
                    order = np.argsort(prio, axis=1, kind="stable")
                    ranks = np.empty_like(order)
                    np.put_along_axis(ranks, order, np.arange(self.n)[None, :].repeat(self.m, 0), 1)
                    revert = per & (ranks >= cfg.flip_cap)
                    rev = np.zeros_like(flips)
                    rev[self.members[revert]] = True
                    spiked = spiked ^ rev
            if self.inject_on.size or self.inject_off.size:
                spiked = spiked.copy()
                spiked[self.inject_on] = True
                spiked[self.inject_off] = False
            return spiked

        return gate

    def tick(self):
        t = self.net.tick
        forced = sample_noise(self.cfg.noise, t, self.noise_rng, self.net.n)
        if forced.size:
            forced = forced[self.var_mask[forced]]
        refractory_before = self.net.refractory_remaining > 0
        ids = self.net.step(forced=forced, gate=self._gate(t))
        self.inject_on = self.inject_off = np.empty(0, dtype=np.int64)
        if forced.size:
            fired = np.zeros(self.net.n, dtype=bool)
            fired[ids] = True
            self.sources += int(np.count_nonzero(fired[forced] & ~refractory_before[forced]))
        self.spikes += ids.size
        self.events += int(self._deg[ids].sum()) if ids.size else 0
        if self.recorder is not None:
            self.recorder.record(t, ids)
        x_new = hold_state(self.net.last_spike, t, self.cfg.tau)
        if self.tabu_on:
            flipped = np.flatnonzero((x_new != self.x) & self.var_mask)
            if flipped.size:
                u = self.tabu_rng.uniforms(t, self.net.n)[flipped]
                self.lock_until[flipped] = t + stochastic_refractory(self.cfg, u)
        self.x = x_new
        f = self.objective(x_new[self.members])
        better = f < self.best_f
        if better.any():
            self.best_f = np.where(better, f, self.best_f)
            self.best_x[better] = x_new[self.members[better]]
            self.best_tick[better] = t
        if (t + 1) % CHECKPOINT_EVERY == 0:
            for k in range(self.m):
                self.trajectories[k].append(float(self.best_f[k]))
        return f

    def inject(self, member: int, solution: np.ndarray):
        """Make ``member`` read out ``solution`` on the next tick.

        The 1-bits are pre-charged to just below threshold and fire; the
        0-bits are held silent. This overrides tabu locks and the flip cap.
        """
        bits = np.asarray(solution, dtype=bool)
        on, off = self.members[member][bits], self.members[member][~bits]
        if on.size:
            self.net.precharge(on)
        self.inject_on = np.union1d(self.inject_on, on)
        self.inject_off = np.union1d(self.inject_off, off)

    def global_best(self) -> tuple[int, float]:
        k = int(np.lexsort((np.arange(self.m), self.best_f))[0])
        return k, float(self.best_f[k])


def _result(engine: _Engine, member: int, start_tick: int, final_traj) -> AnnealResult:
    return AnnealResult(
        best_solution=engine.best_x[member].copy(),
        best_objective=float(engine.best_f[member]),
        tick_found=int(engine.best_tick[member]),
        spikes_total=engine.spikes,
        objective_trajectory=final_traj,
        synaptic_events=engine.events,
        source_spikes=engine.sources,
        ticks_run=engine.net.tick - start_tick,
        neurons=engine.net.n,
        trace=engine.recorder.trace() if engine.recorder is not None else None,
    )


def _qubo_objective_fn(inst: QuboInstance):
    return lambda xs: qubo_objectives(inst, xs)


def anneal(network: Network, inst: QuboInstance, config: AnnealConfig | None = None, seed: int = 0,
           target: float | None = None, record: bool = False) -> AnnealResult:
    """Run the network for ``config.ticks`` ticks and keep the best readout.

    With ``target`` the run stops at the first tick whose readout reaches it.
    """
    config = config or AnnealConfig()
    if config.ticks < 1:
        raise ValueError("tick budget must be >= 1")
    if network.n != inst.n:
        raise ValueError("network was not built from this instance")
    start = network.tick
    eng = _Engine(network, np.arange(inst.n)[None, :], _qubo_objective_fn(inst), config, seed, record)
    for _ in range(config.ticks):
        eng.tick()
        if target is not None and eng.best_f[0] <= target:
            break
    res = _result(eng, 0, start, eng.trajectories[0])
    res.best_objective = qubo_objective(inst, res.best_solution)
    return res


def solve_qubo(inst: QuboInstance, config: AnnealConfig | None = None, seed: int = 0, **kw) -> AnnealResult:
    config = config or AnnealConfig()
    return anneal(build_qubo_network(inst, config, seed), inst, config, seed, **kw)


def derive_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *path]).generate_state(1, np.uint64)[0])


def iterated_anneal(inst: QuboInstance, config: AnnealConfig | None = None, restarts: int = 1,
                    seed: int = 0, target: float | None = None) -> AnnealResult:
    """Anneal repeatedly; each run starts from the previous run's best solution.

    The first run uses ``seed`` itself, so ``restarts=1`` reproduces
    :func:`anneal`. Every run restarts the noise schedule at tick 0.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    config = config or AnnealConfig()
    best: AnnealResult | None = None
    trajectory: list[float] = []
    spikes = events = sources = ticks = 0
    for r in range(restarts):
        run_seed = seed if r == 0 else derive_seed(seed, r)
        net = build_qubo_network(inst, config, run_seed)
        eng = _Engine(net, np.arange(inst.n)[None, :], _qubo_objective_fn(inst), config, run_seed)
        if best is not None:
            eng.inject(0, best.best_solution)
        for _ in range(config.ticks):
            eng.tick()
            if target is not None and eng.best_f[0] <= target:
                break
        res = _result(eng, 0, 0, eng.trajectories[0])
        offset = ticks
        spikes += res.spikes_total
        events += res.synaptic_events
        sources += res.source_spikes
        ticks += res.ticks_run
        prev = trajectory[-1] if trajectory else np.inf
        trajectory += [min(prev, v) for v in res.objective_trajectory]
        if best is None or res.best_objective < best.best_objective:
            res.tick_found += offset
            best = res
        if target is not None and best.best_objective <= target:
            break
    best.objective_trajectory = trajectory
    best.spikes_total, best.synaptic_events, best.source_spikes, best.ticks_run = spikes, events, sources, ticks
    best.best_objective = qubo_objective(inst, best.best_solution)
    return best


# -- 3-SAT ------------------------------------------------------------------

def build_sat_network(f: CnfFormula, config: AnnealConfig | None = None, seed: int = 0) -> Network:
    """Variable neurons 0..n-1 followed by one clause neuron per clause.

    A variable neuron holds its value by self-excitation. A clause neuron
    sums ``+1`` per literal made false by the previous tick's variable spikes
    (plus a bias for its positive literals) and fires only when all three
    literals are false. Its spike pushes each of its variables towards the
    value that would satisfy it, with weight ``clause_weight``.
    """
    if not f.is_3cnf():
        raise ValueError("solve_sat expects a 3-CNF formula")
    config = config or AnnealConfig()
    net = Network(seed=seed)
    hold = NeuronParams(threshold=config.threshold, decay=config.decay, kind=NeuronKind.LIF_DECAY)
    for _ in range(f.n_vars):
        net.add_neuron(hold)
    var, pos = f.literal_arrays()
    for c in range(f.m):
        n_pos = int(pos[c].sum())
        net.add_neuron(NeuronParams(threshold=3.0 - 0.5, reset=0.0, decay=1.0,
                                    kind=NeuronKind.LIF_DECAY, bias=float(n_pos)))
    for i in range(f.n_vars):
        net.connect(i, i, config.threshold)
    w = config.clause_weight
    weights: dict[tuple[int, int], float] = {}
    for c in range(f.m):
        cid = f.n_vars + c
        for v, p in zip(var[c].tolist(), pos[c].tolist()):
            # positive literal: variable on -> literal true; negative: on -> false
            # (repeated literals in one clause add up)
            weights[(v, cid)] = weights.get((v, cid), 0.0) + (-1.0 if p else 1.0)
            weights[(cid, v)] = weights.get((cid, v), 0.0) + (w if p else -w * 3.0)
    for (pre, post), wt in weights.items():
        net.connect(pre, post, wt)
    return net


def solve_sat(f: CnfFormula, config: AnnealConfig | None = None, seed: int = 0) -> AnnealResult:
    """Minimize the number of unsatisfied clauses; stops as soon as it hits 0."""
    config = config or AnnealConfig(flip_cap=1)
    net = build_sat_network(f, config, seed)
    var, pos = f.literal_arrays()

    def unsat(xs):
        lit_true = xs[:, var].astype(bool) == pos[None]
        return (~lit_true.any(axis=2)).sum(axis=1).astype(float)

    eng = _Engine(net, np.arange(f.n_vars)[None, :], unsat, config, seed)
    for _ in range(config.ticks):
        eng.tick()
        if eng.best_f[0] == 0:
            break
    return _result(eng, 0, 0, eng.trajectories[0])


def config_to_json(config: AnnealConfig) -> str:
    return json.dumps(config.to_dict())
