"""Sampling a Boltzmann distribution with spiking neurons.

A neuron that fires stays "on" for hold ticks. Updating one neuron per
sub-tick makes the spike trains an exact sampler of p(x) ~ exp(-E(x)/T).
"""
import numpy as np

from spikeopt.wta import EnergyNet, all_states, sample_counts, total_variation

rng = np.random.default_rng(1)
w = np.triu(rng.normal(0, 1, (6, 6)), 1)
net = EnergyNet(w + w.T, rng.normal(0, 1, 6), temperature=1.0, hold=10)

p = net.distribution()
states = all_states(6)
top = np.argsort(p)[::-1][:5]
print("five most likely states:")
for i in top:
    print(" ", states[i], f"p={p[i]:.4f}")

for samples in (10_000, 100_000):
    counts = sample_counts(net, samples, seed=0, chains=128, burn_in=30, stride=4)
    print(f"{samples} readouts: total variation {total_variation(counts / counts.sum(), p):.4f}")

# parallel updates are cheaper but biased when couplings are strong
counts = sample_counts(net, 100_000, seed=0, chains=128, burn_in=30, stride=4, sequential=False)
print(f"parallel updates: total variation {total_variation(counts / counts.sum(), p):.4f}")
