"""Seeded random instances used by tests, demos and the ``generate`` command."""
from __future__ import annotations

import numpy as np

from .instances import CnfFormula, CspInstance, QpInstance, QuboInstance, TspInstance


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_qubo(n: int, seed=None, low: int = -8, high: int = 8, density: float = 1.0) -> QuboInstance:
    """Integer upper-triangular Q with entries uniform in [low, high]."""
    rng = _rng(seed)
    q = rng.integers(low, high + 1, size=(n, n)).astype(float)
    if density < 1.0:
        q *= rng.random((n, n)) < density
    return QuboInstance(np.triu(q))


def random_3cnf(n_vars: int, m: int, seed=None) -> CnfFormula:
    """Uniform random 3-CNF: three distinct variables per clause, random signs."""
    rng = _rng(seed)
    clauses = []
    for _ in range(m):
        vs = rng.choice(n_vars, size=3, replace=False) + 1
        signs = rng.choice([-1, 1], size=3)
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return CnfFormula(n_vars, tuple(clauses))


def random_tsp(n: int, seed=None, scale: float = 100.0) -> TspInstance:
    """Euclidean distances between uniform points in a square."""
    rng = _rng(seed)
    pts = rng.random((n, 2)) * scale
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return TspInstance(np.round(d, 6))


def random_qp(dims: int, n_constraints: int, seed=None, lp: bool = False) -> QpInstance:
    """Convex QP whose constraint set contains the origin (so it is feasible)."""
    rng = _rng(seed)
    if lp:
        q = np.zeros((dims, dims))
    else:
        b = rng.normal(size=(dims, dims))
        q = b.T @ b / dims + 0.1 * np.eye(dims)
    p = rng.normal(size=dims) * 2.0
    a = rng.normal(size=(n_constraints, dims))
    k = rng.uniform(0.5, 2.0, size=n_constraints)
    return QpInstance(q, p, a, k)


def simplex_lp(dims: int, seed=None) -> QpInstance:
    """LP over {x >= 0, sum(x) <= 1} with a random cost."""
    rng = _rng(seed)
    a = np.vstack([-np.eye(dims), np.ones((1, dims))])
    k = np.concatenate([np.zeros(dims), [1.0]])
    return QpInstance(np.zeros((dims, dims)), rng.normal(size=dims), a, k)


def bounded_lp(dims: int, n_constraints: int, seed=None) -> QpInstance:
    """LP: ``n_constraints`` random half-spaces through a box ``|x_i| <= 1``.

    The box rows come after the random rows; the origin is feasible.
    """
    inst = random_qp(dims, n_constraints, seed, lp=True)
    a = np.vstack([inst.a, np.eye(dims), -np.eye(dims)])
    k = np.concatenate([inst.k, np.ones(2 * dims)])
    return QpInstance(inst.q, inst.p, a, k)


def random_graph(n: int, p: float, seed=None) -> list[tuple[int, int]]:
    """Erdos-Renyi G(n, p) edge list with u < v."""
    rng = _rng(seed)
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    return list(zip(iu[0][keep].tolist(), iu[1][keep].tolist()))


def random_csp(n_vars: int, domain_size: int, density: float, tightness: float, seed=None) -> CspInstance:
    """Model-B style binary CSP."""
    rng = _rng(seed)
    dom = tuple(range(domain_size))
    cons = {}
    for a, b in random_graph(n_vars, density, rng):
        pairs = {(x, y) for x in dom for y in dom if rng.random() < tightness}
        if pairs:
            cons[(a, b)] = pairs
    return CspInstance((dom,) * n_vars, cons)


def random_weighted_graph(n: int, p: float, seed=None, max_weight: int = 10, directed: bool = True):
    """Edge list ``(u, v, w)`` with integer weights in [1, max_weight]."""
    rng = _rng(seed)
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and (directed or u < v) and rng.random() < p:
                edges.append((u, v, int(rng.integers(1, max_weight + 1))))
    return edges


def random_maze(width: int, height: int, seed=None, wall_density: float = 0.3) -> str:
    """ASCII grid with random walls, 'S' in the top-left and 'G' in the bottom-right."""
    rng = _rng(seed)
    grid = np.where(rng.random((height, width)) < wall_density, "#", ".")
    grid[0, 0] = "S"
    grid[height - 1, width - 1] = "G"
    return "\n".join("".join(row) for row in grid) + "\n"
