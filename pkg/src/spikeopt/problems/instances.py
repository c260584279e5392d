"""Problem instances and their objective evaluators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuboInstance:
    """min over binary x of sum_{i<=j} q[i, j] x_i x_j + offset.

    ``q`` is stored upper-triangular; symmetric or lower entries are folded
    onto the upper triangle. A ``maximize`` instance is negated on
    construction and remembers its original sense in ``sense``.
    """

    q: np.ndarray
    offset: float = 0.0
    sense: str = "minimize"

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise ValueError("Q must be a non-empty square matrix")
        if not np.all(np.isfinite(q)):
            raise ValueError("Q must be finite")
        upper = np.triu(q) + np.tril(q, -1).T
        offset = float(self.offset)
        if self.sense == "maximize":
            upper, offset = -upper, -offset
        elif self.sense != "minimize":
            raise ValueError("sense must be 'minimize' or 'maximize'")
        object.__setattr__(self, "q", _frozen(upper))
        object.__setattr__(self, "offset", offset)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def symmetric(self) -> np.ndarray:
        """Symmetric coupling matrix with the diagonal of ``q``."""
        off = np.triu(self.q, 1)
        return off + off.T + np.diag(np.diag(self.q))

    def __eq__(self, other):
        return (isinstance(other, QuboInstance) and np.array_equal(self.q, other.q)
                and self.offset == other.offset)


@dataclass(frozen=True, eq=False)
class IsingInstance:
    """E(s) = sum_{i<j} j[i, j] s_i s_j + sum_i h_i s_i + offset, s in {-1, +1}."""

    j: np.ndarray
    h: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        j = np.array(self.j, dtype=float)
        h = np.array(self.h, dtype=float)
        if j.shape != (h.size, h.size):
            raise ValueError("J must be n x n for n fields")
        if not np.allclose(j, j.T, atol=0, rtol=0) or np.any(np.diag(j) != 0):
            raise ValueError("J must be symmetric with a zero diagonal")
        object.__setattr__(self, "j", _frozen(j))
        object.__setattr__(self, "h", _frozen(h))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.h.size

    def __eq__(self, other):
        return (isinstance(other, IsingInstance) and np.array_equal(self.j, other.j)
                and np.array_equal(self.h, other.h) and self.offset == other.offset)


@dataclass(frozen=True)
class CnfFormula:
    """Clauses are tuples of non-zero literals in +-[1..n_vars]."""

    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise ValueError(f"literal {lit} outside +-[1..{self.n_vars}]")
        object.__setattr__(self, "clauses", clauses)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def is_3cnf(self) -> bool:
        return all(len(c) == 3 for c in self.clauses)

    def literal_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(var, positive)`` arrays of shape (m, 3) for a 3-CNF formula."""
        var = np.array([[abs(l) - 1 for l in c] for c in self.clauses], dtype=np.int64).reshape(-1, 3)
        pos = np.array([[l > 0 for l in c] for c in self.clauses], dtype=bool).reshape(-1, 3)
        return var, pos


@dataclass(frozen=True)
class CspInstance:
    """Binary CSP with extensional constraints.

    ``constraints`` maps a variable pair ``(a, b)`` with ``a < b`` to the set of
    forbidden value pairs ``(value_a, value_b)``.
    """

    domains: tuple[tuple, ...]
    constraints: dict = field(default_factory=dict)

    def __post_init__(self):
        domains = tuple(tuple(d) for d in self.domains)
        cons = {}
        for (a, b), pairs in dict(self.constraints).items():
            if not (0 <= a < len(domains) and 0 <= b < len(domains)) or a == b:
                raise ValueError(f"constraint on unknown or repeated variables ({a}, {b})")
            pairs = {tuple(p) for p in pairs}
            if a > b:
                a, b = b, a
                pairs = {(y, x) for x, y in pairs}
            for x, y in pairs:
                if x not in domains[a] or y not in domains[b]:
                    raise ValueError(f"forbidden pair {(x, y)} outside the domains of ({a}, {b})")
            cons[(a, b)] = frozenset(pairs) | cons.get((a, b), frozenset())
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "constraints", cons)

    @property
    def n(self) -> int:
        return len(self.domains)

    @classmethod
    def all_different(cls, n_vars: int, domain, pairs) -> "CspInstance":
        domain = tuple(domain)
        same = {(v, v) for v in domain}
        return cls((domain,) * n_vars, {tuple(p): same for p in pairs})

    @classmethod
    def coloring(cls, n_nodes: int, edges, k: int) -> "CspInstance":
        return cls.all_different(n_nodes, range(k), {tuple(sorted(e)) for e in edges})


@dataclass(frozen=True, eq=False)
class TspInstance:
    dist: np.ndarray

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
            raise ValueError("distance matrix must be square")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distances must be finite and non-negative")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        object.__setattr__(self, "dist", _frozen(d))

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __eq__(self, other):
        return isinstance(other, TspInstance) and np.array_equal(self.dist, other.dist)


def is_psd(q: np.ndarray, tol: float = 1e-9) -> bool:
    """Cholesky test of ``q + tol*I`` (after a symmetry check)."""
    q = np.asarray(q, dtype=float)
    if not np.allclose(q, q.T, atol=tol):
        return False
    try:
        np.linalg.cholesky(q + tol * np.eye(q.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class QpInstance:
    """min 1/2 x'Qx + p'x subject to Ax <= k, with Q positive semi-definite."""

    q: np.ndarray
    p: np.ndarray
    a: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.array(self.q, dtype=float))
        p = np.atleast_1d(np.array(self.p, dtype=float))
        a = np.array(self.a, dtype=float)
        k = np.atleast_1d(np.array(self.k, dtype=float))
        size = p.size
        if a.size == 0:
            a = np.zeros((0, size))
            k = np.zeros(0)
        a = np.atleast_2d(a)
        if q.shape != (size, size) or a.shape != (k.size, size):
            raise ValueError("QP dimensions do not match")
        if not is_psd(q):
            raise ValueError("Q must be symmetric positive semi-definite")
        for name, val in (("q", q), ("p", p), ("a", a), ("k", k)):
            object.__setattr__(self, name, _frozen(val))

    @property
    def dims(self) -> int:
        return self.p.size

    @property
    def n_constraints(self) -> int:
        return self.k.size

    def __eq__(self, other):
        return isinstance(other, QpInstance) and all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in "qpak")


# -- evaluators -------------------------------------------------------------

def qubo_objective(inst: QuboInstance, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ValueError(f"assignment has length {x.size}, expected {inst.n}")
    return float(x @ inst.q @ x) + inst.offset


def qubo_objectives(inst: QuboInstance, xs) -> np.ndarray:
    """Objective of every row of ``xs``."""
    xs = np.asarray(xs, dtype=float)
    return ((xs @ inst.q) * xs).sum(axis=1) + inst.offset


def ising_energy(inst: IsingInstance, s) -> float:
    s = np.asarray(s, dtype=float)
    if s.shape != (inst.n,):
        raise ValueError(f"spin vector has length {s.size}, expected {inst.n}")
    return float(0.5 * s @ inst.j @ s + inst.h @ s) + inst.offset


def qubo_to_ising(inst: QuboInstance) -> IsingInstance:
    """Substitute x = (s + 1) / 2."""
    upper = np.triu(inst.q, 1)
    sym = upper + upper.T
    diag = np.diag(inst.q)
    j = sym / 4.0
    h = diag / 2.0 + sym.sum(axis=1) / 4.0
    offset = inst.offset + diag.sum() / 2.0 + upper.sum() / 4.0
    return IsingInstance(j, h, offset)


def ising_to_qubo(inst: IsingInstance) -> QuboInstance:
    """Substitute s = 2x - 1."""
    upper = np.triu(inst.j, 1)
    q = 4.0 * upper + np.diag(2.0 * inst.h - 2.0 * inst.j.sum(axis=1))
    offset = inst.offset + upper.sum() - inst.h.sum()
    return QuboInstance(q, offset)


def cnf_eval(f: CnfFormula, assignment) -> tuple[int, bool]:
    a = np.asarray(assignment).astype(bool)
    if a.shape != (f.n_vars,):
        raise ValueError(f"assignment has length {a.size}, expected {f.n_vars}")
    sat = sum(any(a[abs(l) - 1] == (l > 0) for l in c) for c in f.clauses)
    return sat, sat == f.m


def csp_violations(inst: CspInstance, assignment) -> int:
    """Number of constraints whose forbidden pair set contains the assignment."""
    if len(assignment) != inst.n:
        raise ValueError(f"assignment has length {len(assignment)}, expected {inst.n}")
    for i, v in enumerate(assignment):
        if v not in inst.domains[i]:
            raise ValueError(f"value {v!r} outside the domain of variable {i}")
    return sum((assignment[a], assignment[b]) in pairs for (a, b), pairs in inst.constraints.items())


def tour_length(inst: TspInstance, tour) -> float:
    tour = [int(c) for c in tour]
    if sorted(tour) != list(range(inst.n)):
        raise ValueError(f"{tour} is not a permutation of 0..{inst.n - 1}")
    t = np.array(tour)
    return float(inst.dist[t, np.roll(t, -1)].sum())


def qp_objective(inst: QpInstance, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.dims,):
        raise ValueError(f"x has length {x.size}, expected {inst.dims}")
    return float(0.5 * x @ inst.q @ x + inst.p @ x)


def qp_gradient(inst: QpInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.dims,):
        raise ValueError(f"x has length {x.size}, expected {inst.dims}")
    return inst.q @ x + inst.p


def constraint_violation(inst: QpInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.dims,):
        raise ValueError(f"x has length {x.size}, expected {inst.dims}")
    return np.maximum(0.0, inst.a @ x - inst.k)
