"""Population methods: a collaborating swarm of annealers, oscillator PSO and spiking ACO."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .anneal import AnnealConfig, AnnealResult, _Engine, _qubo_objective_fn, _result, build_qubo_network
from .core import STREAM_GATE, CounterStream, Network, NeuronKind, NeuronParams
from .problems import QuboInstance, TspInstance, qubo_objective, tour_length


# -- swarm of annealing networks ---------------------------------------------

@dataclass(frozen=True)
class SwarmConfig:
    m: int = 8
    share_period: int = 50
    base: AnnealConfig = AnnealConfig()
    collaborate: bool = True

    def __post_init__(self):
        if isinstance(self.base, dict):
            object.__setattr__(self, "base", AnnealConfig.from_dict(self.base))
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.share_period < 1:
            raise ValueError("share_period must be >= 1")

    def to_dict(self) -> dict:
        return {"m": self.m, "share_period": self.share_period, "base": self.base.to_dict(),
                "collaborate": self.collaborate}

    @classmethod
    def from_dict(cls, d: dict) -> "SwarmConfig":
        return cls(**d)


@dataclass
class SyncEvent:
    tick: int
    global_best: float
    member_bests: list[float]
    source: int


def collaborative_solve(inst: QuboInstance, cfg: SwarmConfig | None = None, seed: int = 0,
                        target: float | None = None) -> AnnealResult:
    """Run ``cfg.m`` annealing networks side by side in one block network.

    Every ``share_period`` ticks the best solution found so far (ties go to
    the lower member index) is injected into every member whose own best is
    worse. With ``collaborate=False`` the members never interact. The result
    carries the global best, per-member trajectories and a ``syncs`` log.
    """
    cfg = cfg or SwarmConfig()
    base = cfg.base
    n = inst.n
    net = build_qubo_network(inst, base, seed, copies=cfg.m)
    members = np.arange(cfg.m * n).reshape(cfg.m, n)
    eng = _Engine(net, members, _qubo_objective_fn(inst), base, seed)
    syncs: list[SyncEvent] = []
    for _ in range(base.ticks):
        eng.tick()
        k, best = eng.global_best()
        if target is not None and best <= target:
            break
        t = net.tick
        if cfg.collaborate and t % cfg.share_period == 0:
            syncs.append(SyncEvent(t, best, eng.best_f.tolist(), k))
            for j in range(cfg.m):
                if eng.best_f[j] > best:
                    eng.inject(j, eng.best_x[k])
    k, _ = eng.global_best()
    res = _result(eng, k, 0, [min(vals) for vals in zip(*eng.trajectories)] if eng.trajectories[0] else [])
    res.best_objective = qubo_objective(inst, res.best_solution)
    res.tick_found = int(eng.best_tick[eng.best_f == eng.best_f[k]].min())
    res.member_trajectories = [list(tr) for tr in eng.trajectories]
    res.syncs = syncs
    return res


def write_member_trajectories(result: AnnealResult, path, every: int = 100):
    """CSV with columns tick, member, best_objective (one row per checkpoint)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tick", "member", "best_objective"])
        for i, traj in enumerate(result.member_trajectories or [result.objective_trajectory]):
            for c, v in enumerate(traj):
                w.writerow([(c + 1) * every, i, repr(float(v))])


# -- oscillator PSO ------------------------------------------------------------

@dataclass(frozen=True)
class OsnnConfig:
    theta: float = 3.0
    delta: float = 0.99
    n_particles: int = 10
    dims: int = 2
    iterations: int = 10_000
    target: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.n_particles < 1 or self.dims < 1:
            raise ValueError("n_particles and dims must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OsnnState:
    """Per-particle oscillators ``(y, v)``, each of shape (N, D), plus bests.

    ``last_spikes`` is the (N, D) mask of oscillators that emitted on the
    previous sweep; the last particle's emissions reach particle 0 on the
    next sweep.
    """
    y: np.ndarray
    v: np.ndarray
    pb: np.ndarray
    pb_f: np.ndarray
    gb: np.ndarray
    gb_f: float
    last_spikes: np.ndarray
    sweep: int = 0

    def positions(self) -> np.ndarray:
        return self.y + (self.pb + self.gb) / 2.0

    def copy(self) -> "OsnnState":
        return OsnnState(self.y.copy(), self.v.copy(), self.pb.copy(), self.pb_f.copy(), self.gb.copy(),
                         self.gb_f, self.last_spikes.copy(), self.sweep)


def _evaluate(f, xs: np.ndarray) -> np.ndarray:
    return np.array([float(f(x)) for x in xs])


def osnn_init(f, bounds, cfg: OsnnConfig, seed: int = 0) -> OsnnState:
    """Positions uniform in ``bounds``; velocities uniform in +-half the box width."""
    lo, hi = _bounds(bounds, cfg.dims)
    rng = np.random.default_rng(seed)
    x0 = lo + rng.random((cfg.n_particles, cfg.dims)) * (hi - lo)
    v0 = (rng.random((cfg.n_particles, cfg.dims)) - 0.5) * (hi - lo)
    fx = _evaluate(f, x0)
    g = int(np.argmin(fx))
    pb, gb = x0.copy(), x0[g].copy()
    y0 = x0 - (pb + gb) / 2.0
    return OsnnState(y0, v0, pb, fx, gb, float(fx[g]), np.zeros_like(x0, dtype=bool))


def _bounds(bounds, dims):
    b = np.asarray(bounds, dtype=float)
    if b.shape == (2,):
        return np.full(dims, b[0]), np.full(dims, b[1])
    if b.shape != (dims, 2):
        raise ValueError("bounds must be (lo, hi) or a (dims, 2) array")
    return b[:, 0], b[:, 1]


def osnn_sweep(state: OsnnState, cfg: OsnnConfig) -> tuple[OsnnState, np.ndarray, np.ndarray]:
    """Oscillator update for one sweep, without the best-position update.

    Returns the new state and the emitted and received spike masks.
    """
    pb, gb = state.pb, state.gb
    q = (pb - gb) / 2.0
    y, v = state.y, state.v
    own = np.abs(y) >= np.abs(pb - gb)
    # one-way ring: particle i hears i-1 from this sweep, particle 0 hears N-1 from the last one
    recv = np.empty_like(own)
    recv[1:] = own[:-1]
    recv[0] = state.last_spikes[-1]
    reset = own | recv
    c, s = math.cos(cfg.theta), math.sin(cfg.theta)
    y_rot = cfg.delta * (c * y - s * v)
    v_rot = cfg.delta * (s * y + c * v)
    new = state.copy()
    new.y = np.where(reset, q, y_rot)
    new.v = np.where(reset, v - (y - q), v_rot)
    new.last_spikes = own
    new.sweep = state.sweep + 1
    return new, own, recv & ~own


def osnn_step(state: OsnnState, cfg: OsnnConfig, f) -> OsnnState:
    """One full sweep followed by the personal and global best updates.

    The new positions are re-expressed around the updated bests so the
    decoded positions are unaffected by the change of centre.
    """
    new, _, _ = osnn_sweep(state, cfg)
    _update_bests(new, f)
    return new


def _update_bests(state: OsnnState, f):
    x = state.positions()
    fx = _evaluate(f, x)
    better = fx < state.pb_f
    if better.any():
        state.pb = np.where(better[:, None], x, state.pb)
        state.pb_f = np.where(better, fx, state.pb_f)
        g = int(np.argmin(state.pb_f))
        if state.pb_f[g] < state.gb_f:
            state.gb, state.gb_f = state.pb[g].copy(), float(state.pb_f[g])
        state.y = x - (state.pb + state.gb) / 2.0


@dataclass
class OsnnResult:
    x: np.ndarray
    objective: float
    sweeps: int
    gb_trajectory: list[float]
    spikes_emitted: int
    spikes_received: int
    log: list | None = field(default=None, repr=False)


def osnn_solve(f, bounds, cfg: OsnnConfig | None = None, seed: int = 0, log: bool = False) -> OsnnResult:
    """Oscillator PSO: N particles x D oscillators, ring-coupled per dimension.

    With ``log=True`` the result holds one entry per sweep:
    ``(sweep, y, v, emitted, received)`` taken after the oscillator update and
    before re-centring on the new bests.
    """
    cfg = cfg or OsnnConfig()
    state = osnn_init(f, bounds, cfg, seed)
    traj = [state.gb_f]
    emitted = received = 0
    entries = [] if log else None
    for _ in range(cfg.iterations):
        if cfg.target is not None and state.gb_f <= cfg.target:
            break
        prev = state
        state, own, recv = osnn_sweep(state, cfg)
        emitted += int(own.sum())
        received += int(recv.sum())
        if entries is not None:
            entries.append((state.sweep, prev.y.copy(), prev.v.copy(), state.y.copy(), state.v.copy(),
                            own.copy(), recv.copy()))
        _update_bests(state, f)
        traj.append(state.gb_f)
    return OsnnResult(state.gb.copy(), state.gb_f, state.sweep, traj, emitted, received, entries)


# -- spiking ACO ---------------------------------------------------------------

@dataclass(frozen=True)
class AcoConfig:
    n_agents: int = 10
    evaporation: float = 0.5
    deposit_scale: float = 1.0
    iterations: int = 200
    alpha: float = 1.0
    beta: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.evaporation < 1.0:
            raise ValueError("evaporation must lie in (0, 1)")
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.deposit_scale < 0:
            raise ValueError("deposit_scale must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def pheromone_update(tau: np.ndarray, tour, length: float, rho: float, deposit_scale: float) -> np.ndarray:
    """Evaporate everywhere, then deposit ``deposit_scale / length`` on both directions of each tour edge."""
    out = (1.0 - rho) * tau
    d = deposit_scale / length if length > 0 else deposit_scale
    t = np.asarray(tour)
    nxt = np.roll(t, -1)
    np.add.at(out, (t, nxt), d)
    np.add.at(out, (nxt, t), d)
    return out


def _nearest_neighbour_length(dist: np.ndarray) -> float:
    n = dist.shape[0]
    seen = [0]
    while len(seen) < n:
        row = dist[seen[-1]].copy()
        row[seen] = np.inf
        seen.append(int(np.argmin(row)))
    return float(dist[seen, np.roll(seen, -1)].sum())


def build_aco_network(inst: TspInstance, tau: np.ndarray, cfg: AcoConfig, agents: int) -> Network:
    """One block of n city neurons per agent.

    City neurons are IF units whose refractory period outlasts a whole trip,
    so each fires exactly once; the synapse i -> j carries the attraction
    ``tau_ij**alpha * eta_ij**beta`` with ``eta = 1/d``.
    """
    n = inst.n
    d = inst.dist
    with np.errstate(divide="ignore"):
        eta = np.where(d > 0, 1.0 / d, 1e12)
    attract = tau ** cfg.alpha * eta ** cfg.beta
    net = Network()
    city = NeuronParams(threshold=1e-300, kind=NeuronKind.IF, refractory=n)
    for _ in range(agents):
        net.add_neurons(n, city)
    for a in range(agents):
        base = a * n
        for i in range(n):
            for j in range(n):
                if i != j:
                    net.connect(base + i, base + j, float(attract[i, j]))
    return net


@dataclass
class AcoResult:
    tour: list[int]
    length: float
    iteration_found: int
    best_trajectory: list[float]
    spikes_total: int
    ticks_run: int
    neurons: int
    pheromone: np.ndarray = field(repr=False, default=None)
    agent_tours: np.ndarray = field(repr=False, default=None)  # every agent's tour on the last iteration


def aco_tsp_solve(inst: TspInstance, cfg: AcoConfig | None = None, seed: int = 0) -> AcoResult:
    """Ant colony search where each ant is a WTA network over the cities.

    On every tick of a trip the neurons driven by the last city's spike
    propose to fire; a winner is drawn among them with probability
    proportional to its synaptic input (roulette, no softmax) and the others
    are suppressed. The firing order is the tour.
    """
    cfg = cfg or AcoConfig()
    n = inst.n
    if n < 3:
        raise ValueError("ACO needs at least 3 cities")
    stream = CounterStream(seed, STREAM_GATE)
    start_rng = np.random.default_rng(seed)
    tau = np.full((n, n), cfg.deposit_scale / _nearest_neighbour_length(inst.dist) if cfg.deposit_scale else 1.0)
    np.fill_diagonal(tau, 0.0)
    best_tour, best_len, best_iter = None, np.inf, 0
    trajectory = []
    spikes = clock = 0
    m = cfg.n_agents
    for it in range(cfg.iterations):
        net = build_aco_network(inst, tau, cfg, m)
        starts = start_rng.integers(0, n, size=m)
        order = np.full((m, n), -1, dtype=np.int64)
        for step in range(n):
            u = stream.uniforms(clock, m)
            clock += 1

            def gate(spiked, refractory, u=u):
                prop = spiked.reshape(m, n)
                drive = np.where(prop, net.last_input.reshape(m, n), 0.0)
                cum = np.cumsum(drive, axis=1)
                pick = (cum > (u * cum[:, -1])[:, None]).argmax(axis=1)
                out = np.zeros((m, n), dtype=bool)
                has = cum[:, -1] > 0
                out[has, pick[has]] = True
                return out.ravel()

            if step == 0:
                ids = net.step(forced=np.arange(m) * n + starts, gate=lambda s, r: s)
            else:
                ids = net.step(gate=gate)
            spikes += ids.size
            order[ids // n, step] = ids % n
        lengths = inst.dist[order, np.roll(order, -1, axis=1)].sum(axis=1)
        k = int(np.argmin(lengths))
        if lengths[k] < best_len:
            best_tour, best_len, best_iter = order[k].tolist(), float(lengths[k]), it
        tau = pheromone_update(tau, order[k], float(lengths[k]), cfg.evaporation, cfg.deposit_scale)
        trajectory.append(best_len)
    return AcoResult(best_tour, tour_length(inst, best_tour), best_iter, trajectory, spikes, clock,
                     m * n, tau, order)


# -- continuous benchmark functions ---------------------------------------------

def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def levy(x) -> float:
    w = 1.0 + (np.asarray(x, dtype=float) - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return float(head + mid + tail)


def weierstrass(x, a: float = 0.5, b: float = 3.0, k_max: int = 20) -> float:
    x = np.asarray(x, dtype=float)
    k = np.arange(k_max + 1)
    ak, bk = a ** k, b ** k
    inner = np.sum(ak[None, :] * np.cos(2.0 * np.pi * bk[None, :] * (x[:, None] + 0.5)), axis=1)
    return float(np.sum(inner) - x.size * np.sum(ak * np.cos(np.pi * bk)))


# name -> (function, default bounds); every minimum is 0
BENCHMARKS = {
    "sphere": (sphere, (-5.12, 5.12)),
    "rastrigin": (rastrigin, (-5.12, 5.12)),
    "levy": (levy, (-10.0, 10.0)),
    "weierstrass": (weierstrass, (-0.5, 0.5)),
}
