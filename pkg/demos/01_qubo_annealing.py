"""Stochastic annealing on a spiking network: QUBO and 3-SAT.

Each binary variable is a stochastic LIF neuron; its bit is 1 while the
neuron has spiked within the last tau ticks. Noise decays over time, which
plays the role of a falling temperature.
"""
from spikeopt.anneal import AnnealConfig, iterated_anneal, solve_qubo, solve_sat
from spikeopt.core import NoiseSchedule
from spikeopt.problems import brute_force, cnf_eval, generators

# %% a 16-variable QUBO with integer couplings in [-8, 8]
inst = generators.random_qubo(16, 7)
opt = brute_force(inst)
print(f"brute-force optimum {opt.objective} at {opt.solution}")

res = solve_qubo(inst, AnnealConfig(ticks=5000), seed=1)
print(f"annealed best {res.best_objective} found at tick {res.tick_found}, {res.spikes_total} spikes")
print("best-so-far every 100 ticks:", res.objective_trajectory[:10], "...")

# %% a hotter, slower-cooling schedule and a few restarts
cfg = AnnealConfig(ticks=2000, noise=NoiseSchedule(0.3, 0.998))
res = iterated_anneal(inst, cfg, restarts=4, seed=1)
print(f"4 restarts: best {res.best_objective}")

# %% 3-SAT: clause neurons excite the literals that would satisfy them
f = generators.random_3cnf(20, 85, 2)
res = solve_sat(f, AnnealConfig(ticks=20_000, flip_cap=1), seed=0)
sat, ok = cnf_eval(f, res.best_solution)
print(f"3-SAT n=20 m=85: {sat}/85 clauses satisfied, satisfied={ok}, tick {res.tick_found}")
