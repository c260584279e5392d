"""Energy estimates from spike counts and the size and depth of a network."""
from spikeopt.anneal import AnnealConfig, anneal, build_qubo_network
from spikeopt.metrics import EnergyModel, complexity, estimate_energy
from spikeopt.problems import generators
from spikeopt.wavefront import WeightedGraph, build_graph_network

inst = generators.random_qubo(20, 1)
cfg = AnnealConfig(ticks=2000)
net = build_qubo_network(inst, cfg, 0)
res = anneal(net, inst, cfg, 0, record=True)

# illustrative coefficients only; real ones depend on the hardware
model = EnergyModel(p_static=1e-3, e_spike_emit=2e-11, e_spike_transmit=5e-12, e_synaptic_event=2e-12,
                    tick_duration=1e-6)
e = estimate_energy(res.trace, net, model)
for name, value in e.to_dict().items():
    print(f"{name:16s} {value:.3e} J")

dag = build_graph_network(WeightedGraph(4, ((0, 1, 2), (1, 3, 1), (0, 2, 1), (2, 3, 1))))
print(complexity(dag, inputs=[0], outputs=[3]).to_dict())
print(complexity(net).to_dict())
