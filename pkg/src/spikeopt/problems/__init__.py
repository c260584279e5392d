from .instances import (
    CnfFormula,
    CspInstance,
    IsingInstance,
    QpInstance,
    QuboInstance,
    TspInstance,
    cnf_eval,
    constraint_violation,
    csp_violations,
    ising_energy,
    ising_to_qubo,
    is_psd,
    qp_gradient,
    qp_objective,
    qubo_objective,
    qubo_objectives,
    qubo_to_ising,
    tour_length,
)
from .io import (
    BoundsError,
    ParseError,
    load_coloring,
    parse_csp,
    parse_dimacs,
    parse_dimacs_graph,
    parse_ising,
    parse_qp,
    parse_qubo,
    parse_tsp,
    write_csp,
    write_dimacs,
    write_qp,
    write_qubo,
    write_tsp,
)
from .oracle import Optimum, SizeCapError, brute_force, unsatisfied_counts
from . import generators

__all__ = [name for name in dir() if not name.startswith("_")]
