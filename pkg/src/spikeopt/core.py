"""Tick-driven simulation of IF / LIF / stochastic spiking networks.

Time advances in integer ticks. Every neuron integrates, in parallel, the
input that was scheduled for the current tick by spikes emitted on earlier
ticks, so a synapse of delay ``d`` carries a spike emitted at tick ``t`` into
the integration of tick ``t + d``.

All randomness is drawn from :class:`CounterStream` objects, which address a
uniform draw by ``(stream, neuron, tick)``. Adding neurons to a network never
changes the draws seen by the neurons that were already there.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse

SCHEMA_NETWORK = "spikeopt.network/1"

# streams used by the engine and the solvers built on it
STREAM_NOISE = 0
STREAM_NEURON = 1
STREAM_TABU = 2
STREAM_GATE = 3

_DENSE_LIMIT = 600


class NeuronKind(str, enum.Enum):
    IF = "if"
    LIF = "lif"  # subtractive leak
    LIF_DECAY = "lif-decay"  # proportional leak
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class NeuronParams:
    """Static parameters of a neuron.

    ``leak`` is subtracted every tick (``LIF``); ``decay`` is the fraction of
    the potential lost every tick (``LIF_DECAY`` and ``STOCHASTIC``);
    ``capacitance`` divides the input of an ``IF`` neuron. ``bias`` is a
    constant input added on every tick. A ``STOCHASTIC`` neuron fires with
    probability ``sigmoid(V - threshold)`` instead of deterministically.
    """

    threshold: float = 1.0
    reset: float = 0.0
    leak: float = 0.0
    decay: float = 0.0
    refractory: int = 0
    capacitance: float = 1.0
    kind: NeuronKind = NeuronKind.LIF
    bias: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NeuronKind(self.kind))
        if not self.threshold > self.reset:
            raise ValueError("threshold must exceed reset")
        if self.refractory < 0 or int(self.refractory) != self.refractory:
            raise ValueError("refractory must be a non-negative integer")
        object.__setattr__(self, "refractory", int(self.refractory))
        if not 0.0 <= self.decay <= 1.0:
            raise ValueError("decay must lie in [0, 1]")
        if self.leak < 0:
            raise ValueError("leak must be non-negative")
        if self.capacitance <= 0:
            raise ValueError("capacitance must be positive")

    def coefficients(self) -> tuple[float, float, float]:
        """Return ``(keep, scale, leak)`` so that V' = keep*V + scale*input - leak."""
        if self.kind is NeuronKind.IF:
            return 1.0, 1.0 / self.capacitance, 0.0
        if self.kind is NeuronKind.LIF:
            return 1.0, 1.0, self.leak
        return 1.0 - self.decay, 1.0, 0.0


@dataclass
class NeuronState:
    potential: float = 0.0
    refractory_remaining: int = 0
    last_spike: int | None = None


@dataclass(frozen=True)
class Synapse:
    pre: int
    post: int
    weight: float
    delay: int = 1

    def __post_init__(self):
        if self.delay < 1 or int(self.delay) != self.delay:
            raise ValueError("synaptic delay must be an integer >= 1")


@dataclass(frozen=True)
class NoiseSchedule:
    """Decaying noise: each neuron noise-fires with probability mu * beta**t."""

    mu: float
    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")

    def probability(self, tick: int) -> float:
        return self.mu * self.beta ** tick


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


class CounterStream:
    """Uniform draws in [0, 1) addressed by ``(neuron, tick)``.

    Each neuron owns an independent Philox sequence keyed by ``(seed, stream,
    neuron)``; the draw for tick ``t`` is element ``t`` of that sequence.
    Draws are generated in chunks of ticks and cached.
    """

    def __init__(self, seed: int, stream: int, chunk: int = 1024):
        if chunk % 4:
            raise ValueError("chunk must be a multiple of 4")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream)
        self.chunk = chunk
        self._block = -1
        self._cache = np.empty((chunk, 0))

    def _column(self, neuron: int, block: int) -> np.ndarray:
        key = np.array([self.seed, (self.stream << 40) | neuron], dtype=np.uint64)
        counter = np.array([block * self.chunk // 4, 0, 0, 0], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
        return gen.random(self.chunk)

    def uniforms(self, tick: int, n: int) -> np.ndarray:
        block, row = divmod(int(tick), self.chunk)
        if block != self._block:
            self._cache = np.column_stack(
                [self._column(i, block) for i in range(n)]
            ) if n else np.empty((self.chunk, 0))
            self._block = block
        elif self._cache.shape[1] < n:
            extra = np.column_stack(
                [self._column(i, block) for i in range(self._cache.shape[1], n)]
            )
            self._cache = np.hstack([self._cache, extra])
        return self._cache[row, :n]

    def uniform(self, tick: int, neuron: int) -> float:
        return float(self._column(neuron, tick // self.chunk)[tick % self.chunk])


def integrate(
    state: NeuronState,
    params: NeuronParams,
    weighted_input: float,
    uniform: float | None = None,
) -> tuple[NeuronState, bool]:
    """Advance one neuron by one tick.

    ``weighted_input`` is the synaptic input already summed for this tick;
    ``params.bias`` is added to it. ``uniform`` is required for stochastic
    neurons. A refractory neuron keeps its potential and cannot spike.
    """
    if state.refractory_remaining > 0:
        return replace(state, refractory_remaining=state.refractory_remaining - 1), False
    keep, scale, leak = params.coefficients()
    v = keep * state.potential + scale * (weighted_input + params.bias) - leak
    if params.kind is NeuronKind.STOCHASTIC:
        if uniform is None:
            raise ValueError("stochastic neurons need a uniform draw")
        fired = bool(uniform < sigmoid(v - params.threshold))
    else:
        fired = v >= params.threshold
    if fired:
        return NeuronState(params.reset, params.refractory, state.last_spike), True
    return NeuronState(v, 0, state.last_spike), False


def sample_noise(schedule: NoiseSchedule, tick: int, rng: CounterStream, n: int) -> np.ndarray:
    """Indices of neurons that noise-fire at ``tick``.

    Neuron ``i`` fires when its draw ``R_i(tick)`` falls below ``mu*beta**tick``.
    """
    p = schedule.probability(tick)
    if p <= 0.0 or n == 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(rng.uniforms(tick, n) < p)


class Network:
    """A spiking network with delayed synapses and a pending-input queue.

    ``psp_duration`` sets the length, in ticks, of the rectangular
    post-synaptic current produced by one spike (1 = a single-tick impulse).
    ``weight_bits`` optionally quantizes synaptic weights onto a symmetric
    integer grid of that many bits, scaled by the largest magnitude.
    """

    def __init__(self, seed: int = 0, psp_duration: int = 1, weight_bits: int | None = None):
        if psp_duration < 1:
            raise ValueError("psp_duration must be >= 1")
        self.seed = int(seed)
        self.psp_duration = int(psp_duration)
        self.weight_bits = weight_bits
        self.tick = 0
        self._params: list[NeuronParams] = []
        self._synapses: dict[tuple[int, int], Synapse] = {}
        self._v = np.zeros(0)
        self._rr = np.zeros(0, dtype=np.int64)
        self._last = np.zeros(0, dtype=np.int64)
        self._queue = np.zeros((1, 0))
        self._current = np.zeros(0)
        self._compiled = False
        self._neuron_rng = CounterStream(self.seed, STREAM_NEURON)
        self.last_input = np.zeros(0)

    # -- construction -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self._params)

    def add_neuron(self, params: NeuronParams = NeuronParams(), state: NeuronState | None = None) -> int:
        state = state or NeuronState()
        self._params.append(params)
        self._v = np.append(self._v, state.potential)
        self._rr = np.append(self._rr, state.refractory_remaining)
        self._last = np.append(self._last, -1 if state.last_spike is None else state.last_spike)
        self._compiled = False
        return self.n - 1

    def add_neurons(self, count: int, params: NeuronParams = NeuronParams()) -> range:
        start = self.n
        for _ in range(count):
            self.add_neuron(params)
        return range(start, self.n)

    def connect(self, pre: int, post: int, weight: float, delay: int = 1) -> Synapse:
        if not (0 <= pre < self.n and 0 <= post < self.n):
            raise IndexError(f"synapse ({pre}, {post}) refers to a missing neuron")
        if (pre, post) in self._synapses:
            raise ValueError(f"duplicate synapse ({pre}, {post})")
        syn = Synapse(int(pre), int(post), float(weight), int(delay))
        self._synapses[(pre, post)] = syn
        self._compiled = False
        return syn

    @property
    def synapses(self) -> list[Synapse]:
        return list(self._synapses.values())

    @property
    def params(self) -> list[NeuronParams]:
        return list(self._params)

    @property
    def neurons(self) -> list[tuple[NeuronParams, NeuronState]]:
        return [(p, self.state(i)) for i, p in enumerate(self._params)]

    def state(self, i: int) -> NeuronState:
        last = int(self._last[i])
        return NeuronState(float(self._v[i]), int(self._rr[i]), None if last < 0 else last)

    def set_state(self, i: int, state: NeuronState):
        self._v[i] = state.potential
        self._rr[i] = state.refractory_remaining
        self._last[i] = -1 if state.last_spike is None else state.last_spike

    @property
    def potentials(self) -> np.ndarray:
        return self._v

    @property
    def refractory_remaining(self) -> np.ndarray:
        return self._rr

    @property
    def last_spike(self) -> np.ndarray:
        """Tick of each neuron's most recent spike (-1 if none)."""
        return self._last

    def precharge(self, ids, epsilon: float = 1e-9):
        """Set the potential of ``ids`` just below their threshold."""
        ids = np.asarray(ids, dtype=np.int64)
        self._ensure_compiled()
        self._v[ids] = self._thr[ids] - epsilon

    def out_degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for pre, _ in self._synapses:
            deg[pre] += 1
        return deg

    def weight_matrix(self) -> np.ndarray:
        """Dense ``(pre, post)`` matrix of (possibly quantized) weights."""
        w = np.zeros((self.n, self.n))
        for s in self._synapses.values():
            w[s.pre, s.post] = s.weight
        return self._quantize(w)

    def _quantize(self, w: np.ndarray) -> np.ndarray:
        if self.weight_bits is None or not w.size:
            return w
        top = np.max(np.abs(w))
        if top == 0:
            return w
        levels = 2 ** (self.weight_bits - 1) - 1
        step = top / levels
        return np.round(w / step) * step

    # -- compilation --------------------------------------------------
    def _ensure_compiled(self):
        if self._compiled:
            return
        n = self.n
        if n == 0:
            raise ValueError("network has no neurons")
        coeffs = np.array([p.coefficients() for p in self._params]).reshape(n, 3)
        self._keep, self._scale, self._leak = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2]
        self._thr = np.array([p.threshold for p in self._params])
        self._reset = np.array([p.reset for p in self._params])
        self._refr = np.array([p.refractory for p in self._params], dtype=np.int64)
        self._bias = np.array([p.bias for p in self._params])
        self._stoch = np.array([p.kind is NeuronKind.STOCHASTIC for p in self._params])
        self._any_stoch = bool(self._stoch.any())
        by_delay: dict[int, list[Synapse]] = {}
        for s in self._synapses.values():
            by_delay.setdefault(s.delay, []).append(s)
        dense = n <= _DENSE_LIMIT
        self._kernels = []
        for d in sorted(by_delay):
            syns = by_delay[d]
            pre = np.array([s.pre for s in syns])
            post = np.array([s.post for s in syns])
            w = self._quantize_values(np.array([s.weight for s in syns]))
            if dense:
                mat = np.zeros((n, n))
                mat[pre, post] = w
            else:
                mat = sparse.csr_matrix((w, (post, pre)), shape=(n, n))
            self._kernels.append((d, mat, dense))
        max_delay = max(by_delay, default=1)
        depth = max_delay + self.psp_duration + 1
        old = self._queue
        queue = np.zeros((depth, n))
        if old.size:
            # preserve pending input, re-indexed by absolute tick
            for k in range(old.shape[0]):
                queue[(self.tick + k) % depth, : old.shape[1]] = old[(self.tick + k) % old.shape[0]]
        self._queue = queue
        if self._current.shape[0] != n:
            self._current = np.concatenate([self._current, np.zeros(n - self._current.shape[0])])
        self.last_input = np.zeros(n)
        self._compiled = True

    def _quantize_values(self, w: np.ndarray) -> np.ndarray:
        if self.weight_bits is None:
            return w
        allw = np.array([s.weight for s in self._synapses.values()])
        top = np.max(np.abs(allw)) if allw.size else 0.0
        if top == 0:
            return w
        step = top / (2 ** (self.weight_bits - 1) - 1)
        return np.round(w / step) * step

    def pending(self) -> np.ndarray:
        """Input already scheduled for the upcoming tick (excluding bias)."""
        self._ensure_compiled()
        return self._queue[self.tick % self._queue.shape[0]].copy()

    def quiescent(self) -> bool:
        """True when no synaptic input is in flight or still flowing."""
        self._ensure_compiled()
        return not self._queue.any() and not self._current.any()

    def inject(self, neuron: int, value: float, at: int | None = None):
        """Schedule extra input for ``neuron`` at absolute tick ``at`` (default: next tick)."""
        self._ensure_compiled()
        at = self.tick if at is None else int(at)
        if at < self.tick or at - self.tick >= self._queue.shape[0]:
            raise ValueError("injection tick outside the queue horizon")
        self._queue[at % self._queue.shape[0], neuron] += value

    # -- dynamics -----------------------------------------------------
    def step(
        self,
        forced: Iterable[int] | np.ndarray | None = None,
        external: np.ndarray | None = None,
        gate: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    ) -> np.ndarray:
        """Advance one tick and return the sorted ids of neurons that spiked.

        ``forced`` neurons spike regardless of their potential unless they are
        refractory. ``external`` is extra input for this tick. ``gate`` receives
        the boolean spike proposal and the refractory mask and returns the
        final spike mask; it may suppress or add spikes on non-refractory
        neurons (a suppressed neuron keeps its integrated potential).
        """
        self._ensure_compiled()
        n = self.n
        t = self.tick
        depth = self._queue.shape[0]
        slot = t % depth
        delivered = self._queue[slot].copy()
        self._queue[slot] = 0.0
        if self.psp_duration > 1:
            self._current += delivered
            syn_in = self._current.copy()
        else:
            syn_in = delivered
        total_in = syn_in + self._bias
        if external is not None:
            total_in = total_in + external
        self.last_input = syn_in

        refractory = self._rr > 0
        v_new = self._keep * self._v + self._scale * total_in - self._leak
        v_new = np.where(refractory, self._v, v_new)
        if self._any_stoch:
            u = self._neuron_rng.uniforms(t, n)
            p = sigmoid(v_new - self._thr)
            spiked = np.where(self._stoch, u < p, v_new >= self._thr)
        else:
            spiked = v_new >= self._thr
        if forced is not None:
            f = np.asarray(forced, dtype=np.int64)
            if f.size:
                spiked[f] = True
        spiked &= ~refractory
        if gate is not None:
            spiked = np.asarray(gate(spiked, refractory), dtype=bool) & ~refractory

        self._rr = np.where(refractory, self._rr - 1, 0)
        ids = np.flatnonzero(spiked)
        if ids.size:
            v_new[ids] = self._reset[ids]
            self._rr[ids] = self._refr[ids]
            self._last[ids] = t
            s = spiked.astype(float)
            for d, mat, dense in self._kernels:
                contrib = s @ mat if dense else mat @ s
                self._queue[(t + d) % depth] += contrib
                if self.psp_duration > 1:
                    self._queue[(t + d + self.psp_duration) % depth] -= contrib
        self._v = v_new
        self.tick = t + 1
        return ids

    # -- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        self._ensure_compiled()
        depth = self._queue.shape[0]
        pending = []
        for k in range(depth):
            row = self._queue[(self.tick + k) % depth]
            for i in np.flatnonzero(row):
                pending.append([k, int(i), float(row[i])])
        return {
            "schema": SCHEMA_NETWORK,
            "seed": self.seed,
            "tick": self.tick,
            "psp_duration": self.psp_duration,
            "weight_bits": self.weight_bits,
            "neurons": [
                {"params": {**asdict(p), "kind": p.kind.value}, "state": asdict(s)}
                for p, s in self.neurons
            ],
            "synapses": [[s.pre, s.post, s.weight, s.delay] for s in self._synapses.values()],
            "current": [float(c) for c in self._current],
            "pending": pending,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        if doc.get("schema") != SCHEMA_NETWORK:
            raise ValueError(f"unsupported network schema {doc.get('schema')!r}")
        net = cls(doc["seed"], doc.get("psp_duration", 1), doc.get("weight_bits"))
        for item in doc["neurons"]:
            net.add_neuron(NeuronParams(**item["params"]), NeuronState(**item["state"]))
        for pre, post, w, d in doc["synapses"]:
            net.connect(pre, post, w, d)
        net.tick = doc["tick"]
        net._ensure_compiled()
        if doc.get("current"):
            net._current = np.array(doc["current"], dtype=float)
        depth = net._queue.shape[0]
        for k, i, val in doc.get("pending", []):
            net._queue[(net.tick + k) % depth, i] += val
        return net

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SpikeTrace:
    """Immutable record of a run.

    ``ticks`` and ``neurons`` are parallel arrays sorted by tick then neuron.
    ``potentials`` (optional) holds the end-of-tick potential of every neuron.
    """

    n_neurons: int
    start: int
    length: int
    ticks: np.ndarray
    neurons: np.ndarray
    synaptic_events: int = 0
    source_spikes: int = 0
    potentials: np.ndarray | None = field(default=None, repr=False)

    @property
    def end(self) -> int:
        return self.start + self.length

    @property
    def records(self) -> list[tuple[int, int]]:
        return list(zip(self.ticks.tolist(), self.neurons.tolist()))

    @property
    def total_spikes(self) -> int:
        return int(self.ticks.size)

    def counts(self) -> np.ndarray:
        """Spike count for each tick of the trace."""
        return np.bincount(self.ticks - self.start, minlength=self.length)[: self.length]

    def spikes_of(self, neuron: int) -> np.ndarray:
        return self.ticks[self.neurons == neuron]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.array([self.n_neurons, self.start, self.length,
                           self.synaptic_events, self.source_spikes], dtype=np.int64).tobytes())
        h.update(self.ticks.astype(np.int64).tobytes())
        h.update(self.neurons.astype(np.int64).tobytes())
        if self.potentials is not None:
            h.update(np.ascontiguousarray(self.potentials, dtype=np.float64).tobytes())
        return h.hexdigest()


class TraceRecorder:
    """Accumulates spikes from successive steps into a :class:`SpikeTrace`."""

    def __init__(self, network: Network, record_potentials: bool = False):
        self.network = network
        self.start = network.tick
        self._ticks: list[np.ndarray] = []
        self._ids: list[np.ndarray] = []
        self._pots: list[np.ndarray] | None = [] if record_potentials else None
        self._deg = network.out_degree()
        self.synaptic_events = 0
        self.source_spikes = 0

    def record(self, tick: int, ids: np.ndarray, sources: int = 0):
        if ids.size:
            self._ticks.append(np.full(ids.size, tick, dtype=np.int64))
            self._ids.append(ids.astype(np.int64))
            self.synaptic_events += int(self._deg[ids].sum())
        self.source_spikes += int(sources)
        if self._pots is not None:
            self._pots.append(self.network.potentials.copy())

    def trace(self) -> SpikeTrace:
        ticks = np.concatenate(self._ticks) if self._ticks else np.empty(0, dtype=np.int64)
        ids = np.concatenate(self._ids) if self._ids else np.empty(0, dtype=np.int64)
        pots = np.array(self._pots) if self._pots is not None else None
        return SpikeTrace(self.network.n, self.start, self.network.tick - self.start,
                          ticks, ids, self.synaptic_events, self.source_spikes, pots)


def step(network: Network, forced=None, external=None, gate=None) -> np.ndarray:
    return network.step(forced=forced, external=external, gate=gate)


def run(
    network: Network,
    ticks: int,
    noise: NoiseSchedule | None = None,
    stimulus: dict[int, Sequence[int]] | None = None,
    record_potentials: bool = False,
) -> SpikeTrace:
    """Run ``ticks`` steps and return the trace.

    Noise fires, drawn with :func:`sample_noise` from the network's noise
    stream, are forced before integration on every tick. ``stimulus`` maps
    absolute ticks to neurons that are forced to spike on that tick.
    """
    if ticks < 1:
        raise ValueError("tick budget must be >= 1")
    rec = TraceRecorder(network, record_potentials)
    rng = CounterStream(network.seed, STREAM_NOISE)
    stimulus = stimulus or {}
    for _ in range(ticks):
        t = network.tick
        forced = [] if noise is None else list(sample_noise(noise, t, rng, network.n))
        forced += list(stimulus.get(t, ()))
        forced_arr = np.unique(np.asarray(forced, dtype=np.int64))
        refractory = network.refractory_remaining > 0
        ids = network.step(forced=forced_arr)
        sources = int((~refractory[forced_arr]).sum()) if forced_arr.size else 0
        rec.record(t, ids, sources)
    return rec.trace()


def readout_state(trace: SpikeTrace, t: int, tau: int) -> np.ndarray:
    """Binary state at tick ``t``: 1 for neurons that spiked in (t - tau, t]."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if t < 0 or t >= trace.end:
        raise ValueError(f"tick {t} outside trace [{trace.start}, {trace.end})")
    x = np.zeros(trace.n_neurons, dtype=np.int8)
    window = (trace.ticks > t - tau) & (trace.ticks <= t)
    x[trace.neurons[window]] = 1
    return x


def hold_state(last_spike: np.ndarray, t: int, tau: int) -> np.ndarray:
    """Same window as :func:`readout_state`, from a last-spike-tick array."""
    return ((last_spike >= 0) & (last_spike > t - tau) & (last_spike <= t)).astype(np.int8)
