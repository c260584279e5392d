"""Gradient/constraint network for convex quadratic programs.

    min 1/2 x'Qx + p'x   subject to   Ax <= k

The first layer holds ``x`` and takes a gradient step ``x - alpha_t (Qx + p)``;
the second layer computes the violations ``max(0, Ax - k)`` and feeds back
the correction ``-beta_t A' max(0, Ax - k)``. The step size shrinks and the
correction gain grows over time, so iterates settle on the constrained
optimum. Neurons here hold real values; nothing is spike-encoded.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .problems import QpInstance, constraint_violation, qp_gradient, qp_objective


def _lambda_max(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((m + m.T) / 2.0)[-1])


@dataclass(frozen=True)
class QpSchedule:
    """alpha_t = alpha0 / (1 + t/t0) and beta_t = min(beta0 (1 + t/t0), beta_max).

    Each iteration takes one gradient step and then lets the correction layer
    settle: up to ``corrections`` correction steps, stopping once every
    violation is below ``feas_tol``.

    ``None`` values are filled in from the instance by :meth:`for_instance`:
    ``alpha0 = 1/lambda_max(Q)`` (or ``1/|p|`` when Q = 0),
    ``beta_max = 1/lambda_max(A'A)`` (the largest gain for which one
    correction never overshoots) and ``beta0 = beta_max / 4``.
    """
    alpha0: float | None = None
    beta0: float | None = None
    t0: float = 100.0
    beta_max: float | None = None
    max_iters: int = 10_000
    tol: float = 1e-10
    corrections: int = 100
    feas_tol: float = 1e-7

    def __post_init__(self):
        if self.alpha0 is not None and not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")
        if self.beta0 is not None and self.beta0 < 0:
            raise ValueError("beta0 must be non-negative")
        if self.beta_max is not None and self.beta0 is not None and self.beta_max < self.beta0:
            raise ValueError("beta_max must be >= beta0")
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.corrections < 1:
            raise ValueError("corrections must be >= 1")

    def for_instance(self, inst: QpInstance) -> "QpSchedule":
        lq = _lambda_max(inst.q)
        alpha0 = self.alpha0
        if alpha0 is None:
            alpha0 = 1.0 / lq if lq > 0 else 1.0 / max(float(np.linalg.norm(inst.p)), 1.0)
        la = _lambda_max(inst.a.T @ inst.a)
        beta_max = self.beta_max if self.beta_max is not None else (1.0 / la if la > 0 else 1.0)
        beta0 = self.beta0 if self.beta0 is not None else beta_max / 4.0
        return QpSchedule(alpha0, beta0, self.t0, max(beta_max, beta0), self.max_iters, self.tol,
                          self.corrections, self.feas_tol)

    def alpha(self, t: int) -> float:
        return self.alpha0 / (1.0 + t / self.t0)

    def beta(self, t: int) -> float:
        return min(self.beta0 * (1.0 + t / self.t0), self.beta_max)


@dataclass
class QpNetState:
    x: np.ndarray
    violations: np.ndarray
    cost_monitor: float


def gradient_step(x, inst: QpInstance, alpha: float) -> np.ndarray:
    """x' = (I - alpha Q) x - alpha p."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=float)
    return x - alpha * qp_gradient(inst, x)


def constraint_correction(x, inst: QpInstance, beta: float) -> np.ndarray:
    """x' = x - beta A' max(0, Ax - k); points with Ax <= k are fixed."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    x = np.asarray(x, dtype=float)
    viol = constraint_violation(inst, x)
    if not viol.any():
        return x.copy()
    return x - beta * (inst.a.T @ viol)


def normalize_constraints(inst: QpInstance) -> QpInstance:
    """Scale every row of ``Ax <= k`` to unit norm; the feasible set is unchanged."""
    if inst.n_constraints == 0:
        return inst
    norms = np.linalg.norm(inst.a, axis=1)
    norms[norms == 0] = 1.0
    return QpInstance(inst.q, inst.p, inst.a / norms[:, None], inst.k / norms)


def readout(x, inst: QpInstance) -> QpNetState:
    x = np.asarray(x, dtype=float)
    return QpNetState(x.copy(), constraint_violation(inst, x), qp_objective(inst, x))


@dataclass
class QpResult:
    x: np.ndarray
    objective: float
    iterations: int
    max_violation: float
    converged: bool
    residuals: list[tuple[int, float, float]] = field(default_factory=list, repr=False)


def solve_qp(inst: QpInstance, sched: QpSchedule | None = None, x0=None, log_every: int = 0) -> QpResult:
    """Alternate gradient and correction steps until ``|dx| < tol`` or ``max_iters``.

    ``log_every > 0`` records ``(iteration, f, max_violation)`` rows.
    """
    inst = normalize_constraints(inst)
    sched = (sched or QpSchedule()).for_instance(inst)
    x = np.zeros(inst.dims) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (inst.dims,):
        raise ValueError(f"x0 has length {x.size}, expected {inst.dims}")
    rows = []
    converged = False
    q, p, a, k = inst.q, inst.p, inst.a, inst.k
    at = np.ascontiguousarray(a.T)
    t = 0
    for t in range(1, sched.max_iters + 1):
        x_new = x - sched.alpha(t - 1) * (q @ x + p)
        beta = sched.beta(t - 1)
        for _ in range(sched.corrections):
            viol = a @ x_new - k
            if viol.max(initial=-np.inf) <= sched.feas_tol:
                break
            viol[viol < 0.0] = 0.0
            x_new -= beta * (at @ viol)
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        if log_every and t % log_every == 0:
            st = readout(x, inst)
            rows.append((t, st.cost_monitor, float(st.violations.max(initial=0.0))))
        if step < sched.tol:
            converged = True
            break
    st = readout(x, inst)
    return QpResult(x, st.cost_monitor, t, float(st.violations.max(initial=0.0)), converged, rows)


def write_convergence_csv(result: QpResult, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "f", "max_violation"])
        for it, f, v in result.residuals:
            w.writerow([it, repr(f), repr(v)])
