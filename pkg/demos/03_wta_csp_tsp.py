"""Winner-take-all networks for graph coloring and a 5-city tour."""
from spikeopt.problems import CspInstance, brute_force, csp_violations, generators
from spikeopt.wta import build_csp_network, build_tsp_network, solve_csp, solve_tsp

# %% three-color a random graph; one WTA group per vertex, inhibition along edges
edges = generators.random_graph(12, 0.3, 4)
inst = CspInstance.coloring(12, edges, 3)
res = solve_csp(build_csp_network(inst), seed=0)
print(f"coloring: success={res.success} after {res.tick} ticks, violations {csp_violations(inst, res.assignment)}")
print("colors:", res.assignment)

# %% TSP: neuron (city, position); rows and columns are WTA groups
tsp = generators.random_tsp(5, 3)
opt = brute_force(tsp).objective
res = solve_tsp(build_tsp_network(tsp), seed=2, target=opt)
print(f"tour {res.tour} length {res.length:.2f} (optimum {opt:.2f}) at tick {res.tick}")
