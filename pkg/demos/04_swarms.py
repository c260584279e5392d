"""Population methods: collaborating annealers, oscillator PSO and spiking ACO."""
import numpy as np

from spikeopt.anneal import AnnealConfig
from spikeopt.problems import brute_force, generators
from spikeopt.swarm import (BENCHMARKS, AcoConfig, OsnnConfig, SwarmConfig, aco_tsp_solve,
                            collaborative_solve, osnn_solve)

# %% eight annealers that share their best readout every 50 ticks
inst = generators.random_qubo(50, 0, low=-3, high=3)
target = -134.0  # best value seen across long independent runs
for collaborate in (False, True):
    ticks = []
    for seed in range(5):
        res = collaborative_solve(inst, SwarmConfig(8, 50, AnnealConfig(ticks=3000), collaborate), seed, target)
        ticks.append(res.tick_found if res.best_objective <= target else 3000)
    print(f"collaborate={collaborate}: ticks to reach {target}: {ticks}, median {np.median(ticks)}")

# %% oscillator PSO on Rastrigin in 5 dimensions
f, bounds = BENCHMARKS["rastrigin"]
res = osnn_solve(f, bounds, OsnnConfig(dims=5, iterations=3000), seed=0)
print(f"OSNN rastrigin: f={res.objective:.4f} at {np.round(res.x, 3)}, {res.spikes_emitted} spikes")

# %% ants as WTA networks; pheromone lives in the synaptic weights
tsp = generators.random_tsp(7, 1)
res = aco_tsp_solve(tsp, AcoConfig(iterations=100), seed=0)
print(f"ACO tour {res.tour} length {res.length:.2f}, optimum {brute_force(tsp).objective:.2f}")
