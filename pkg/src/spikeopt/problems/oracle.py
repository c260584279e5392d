"""Exhaustive optima for small instances (the reference answer in tests and the CLI)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .instances import CnfFormula, CspInstance, QuboInstance, TspInstance, tour_length

MAX_BINARY_VARS = 24
MAX_TSP_CITIES = 10
MAX_CSP_STATES = 2 ** 24
_CHUNK_BITS = 16


class SizeCapError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Optimum:
    """Best solution under lexicographic tie-breaking.

    ``objective`` follows the minimization convention: QUBO value, tour length,
    number of unsatisfied clauses (CNF) or violated constraints (CSP).
    """

    solution: tuple
    objective: float
    satisfied: int | None = None


def _bit_rows(start: int, count: int, n: int) -> np.ndarray:
    idx = np.arange(start, start + count, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def _enumerate_binary(n: int, score):
    """Minimum of ``score(rows)`` over {0,1}^n, first (lexicographic) minimizer."""
    total = 1 << n
    chunk = min(total, 1 << _CHUNK_BITS)
    best_val, best_idx = np.inf, -1
    for start in range(0, total, chunk):
        vals = score(_bit_rows(start, chunk, n))
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_idx = float(vals[i]), start + i
    return tuple(int(b) for b in _bit_rows(best_idx, 1, n)[0]), best_val


def brute_force_qubo(inst: QuboInstance) -> Optimum:
    if inst.n > MAX_BINARY_VARS:
        raise SizeCapError(f"QUBO with {inst.n} variables exceeds the brute-force cap of {MAX_BINARY_VARS}")
    q = inst.q

    def score(x):
        xf = x.astype(float)
        return np.einsum("ij,jk,ik->i", xf, q, xf) + inst.offset

    sol, val = _enumerate_binary(inst.n, score)
    return Optimum(sol, val)


def unsatisfied_counts(f: CnfFormula, rows: np.ndarray) -> np.ndarray:
    """Unsatisfied-clause count for each assignment row (any clause width)."""
    unsat = np.zeros(rows.shape[0], dtype=np.int64)
    rows = rows.astype(bool)
    for c in f.clauses:
        sat = np.zeros(rows.shape[0], dtype=bool)
        for lit in c:
            col = rows[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        unsat += ~sat
    return unsat


def brute_force_cnf(f: CnfFormula) -> Optimum:
    if f.n_vars > MAX_BINARY_VARS:
        raise SizeCapError(f"CNF with {f.n_vars} variables exceeds the brute-force cap of {MAX_BINARY_VARS}")
    sol, val = _enumerate_binary(f.n_vars, lambda rows: unsatisfied_counts(f, rows))
    return Optimum(sol, val, f.m - int(val))


def brute_force_csp(inst: CspInstance) -> Optimum:
    sizes = [len(d) for d in inst.domains]
    states = int(np.prod(sizes, dtype=object))
    if states > MAX_CSP_STATES or inst.n > MAX_BINARY_VARS:
        raise SizeCapError(f"CSP with {states} assignments exceeds the brute-force cap of {MAX_CSP_STATES}")
    best, best_val = None, np.inf
    # domain order defines the lexicographic order
    for combo in itertools.product(*inst.domains):
        v = sum((combo[a], combo[b]) in pairs for (a, b), pairs in inst.constraints.items())
        if v < best_val:
            best, best_val = combo, v
            if v == 0:
                break
    return Optimum(tuple(best), float(best_val), len(inst.constraints) - int(best_val))


def brute_force_tsp(inst: TspInstance) -> Optimum:
    """Optimal tour starting at city 0 (lexicographically smallest among ties)."""
    n = inst.n
    if n > MAX_TSP_CITIES:
        raise SizeCapError(f"TSP with {n} cities exceeds the brute-force cap of {MAX_TSP_CITIES}")
    if n == 1:
        return Optimum((0,), 0.0)
    best, best_val = None, np.inf
    for rest in itertools.permutations(range(1, n)):
        tour = (0,) + rest
        v = tour_length(inst, tour)
        if v < best_val:
            best, best_val = tour, v
    return Optimum(best, best_val)


def brute_force(problem) -> Optimum:
    if isinstance(problem, QuboInstance):
        return brute_force_qubo(problem)
    if isinstance(problem, CnfFormula):
        return brute_force_cnf(problem)
    if isinstance(problem, CspInstance):
        return brute_force_csp(problem)
    if isinstance(problem, TspInstance):
        return brute_force_tsp(problem)
    raise TypeError(f"no exhaustive oracle for {type(problem).__name__}")
