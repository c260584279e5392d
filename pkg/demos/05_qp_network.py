"""A gradient layer and a constraint layer solving a small QP and an LP."""
from spikeopt.problems import generators
from spikeopt.qp import solve_qp

inst = generators.random_qp(6, 3, 2)
res = solve_qp(inst, log_every=500)
print(f"QP: f={res.objective:.6f}, max violation {res.max_violation:.1e}, {res.iterations} iterations")
for it, f, v in res.residuals[:6]:
    print(f"  iter {it:5d}  f {f:.6f}  violation {v:.1e}")

lp = generators.simplex_lp(4, 1)
res = solve_qp(lp)
print(f"LP over the simplex: x={res.x.round(4)}, cost {res.objective:.4f}, cheapest vertex {min(0, lp.p.min()):.4f}")
