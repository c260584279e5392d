"""Text and JSON formats for problem instances.

QUBO   ``n nnz`` header, then ``i j value`` lines (0-indexed, i <= j).
CNF    DIMACS: ``c`` comment lines, ``p cnf n m`` header, 0-terminated clauses.
TSP    ``n`` then n rows of n distances.
QP     JSON object with ``q``, ``p``, ``a``, ``k`` arrays.
CSP    JSON object with ``domains`` and ``constraints`` (``scope`` + ``forbidden``).
Graph  DIMACS ``p edge n m`` with ``e u v`` lines (1-indexed), for coloring.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .instances import CnfFormula, CspInstance, IsingInstance, QpInstance, QuboInstance, TspInstance

SCHEMA_ISING = "spikeopt.ising/1"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = f"{path}:" if path else ""
        where += f"{line}: " if line is not None else (" " if where else "")
        super().__init__(f"{where}{message}")


class BoundsError(ParseError):
    """An index in the file is outside the declared size."""


def _read(path) -> str:
    text = Path(path).read_text()
    if not text.strip():
        raise ParseError("empty file", path=path)
    return text


def _lines(text: str):
    """(line number, tokens) for non-blank lines."""
    for no, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split()
        if toks:
            yield no, toks


def _num(tok: str, no: int, path, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", no, path) from None


# -- QUBO -------------------------------------------------------------------

def parse_qubo(path) -> QuboInstance:
    lines = list(_lines(_read(path)))
    no, head = lines[0]
    if len(head) != 2:
        raise ParseError("header must be 'n nnz'", no, path)
    n, nnz = _num(head[0], no, path, int), _num(head[1], no, path, int)
    if n < 1 or nnz < 0:
        raise ParseError("header values must be positive", no, path)
    q = np.zeros((n, n))
    body = lines[1:]
    if len(body) != nnz:
        raise ParseError(f"header declares {nnz} entries, found {len(body)}",
                         body[-1][0] if body else no, path)
    for no, toks in body:
        if len(toks) != 3:
            raise ParseError("expected 'i j value'", no, path)
        i, j = _num(toks[0], no, path, int), _num(toks[1], no, path, int)
        v = _num(toks[2], no, path)
        if not (0 <= i < n and 0 <= j < n):
            raise BoundsError(f"index ({i}, {j}) outside 0..{n - 1}", no, path)
        if i > j:
            raise ParseError(f"entry ({i}, {j}) is below the diagonal", no, path)
        q[i, j] += v
    return QuboInstance(q)


def qubo_text(inst: QuboInstance) -> str:
    rows, cols = np.nonzero(inst.q)
    out = [f"{inst.n} {rows.size}"]
    out += [f"{i} {j} {float(inst.q[i, j])!r}" for i, j in zip(rows.tolist(), cols.tolist())]
    return "\n".join(out) + "\n"


def write_qubo(inst: QuboInstance, path):
    Path(path).write_text(qubo_text(inst))


# -- DIMACS CNF -------------------------------------------------------------

def parse_dimacs(path) -> CnfFormula:
    text = _read(path)
    n_vars = m = None
    clauses, current = [], []
    last_no = 0
    for no, toks in _lines(text):
        last_no = no
        if toks[0] == "c":
            continue
        if toks[0] == "%":  # SATLIB end marker
            break
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] != "cnf":
                raise ParseError("expected 'p cnf <vars> <clauses>'", no, path)
            n_vars, m = _num(toks[2], no, path, int), _num(toks[3], no, path, int)
            continue
        if n_vars is None:
            raise ParseError("clause before the 'p cnf' header", no, path)
        for tok in toks:
            lit = _num(tok, no, path, int)
            if lit == 0:
                if not current:
                    raise ParseError("empty clause", no, path)
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > n_vars:
                raise BoundsError(f"literal {lit} exceeds {n_vars} variables", no, path)
            else:
                current.append(lit)
    if n_vars is None:
        raise ParseError("missing 'p cnf' header", last_no, path)
    if current:
        clauses.append(tuple(current))
    if len(clauses) != m:
        raise ParseError(f"header declares {m} clauses, found {len(clauses)}", last_no, path)
    return CnfFormula(n_vars, tuple(clauses))


def write_dimacs(f: CnfFormula, path):
    out = [f"p cnf {f.n_vars} {f.m}"]
    out += [" ".join(str(l) for l in c) + " 0" for c in f.clauses]
    Path(path).write_text("\n".join(out) + "\n")


# -- TSP --------------------------------------------------------------------

def parse_tsp(path) -> TspInstance:
    lines = list(_lines(_read(path)))
    no, head = lines[0]
    if len(head) != 1:
        raise ParseError("header must be the city count", no, path)
    n = _num(head[0], no, path, int)
    if n < 1:
        raise ParseError("city count must be positive", no, path)
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} matrix rows, found {len(rows)}",
                         rows[-1][0] if rows else no, path)
    dist = np.zeros((n, n))
    for r, (no, toks) in enumerate(rows):
        if len(toks) != n:
            raise ParseError(f"row has {len(toks)} entries, expected {n}", no, path)
        dist[r] = [_num(t, no, path) for t in toks]
    try:
        return TspInstance(dist)
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from None


def write_tsp(inst: TspInstance, path):
    out = [str(inst.n)] + [" ".join(repr(float(v)) for v in row) for row in inst.dist]
    Path(path).write_text("\n".join(out) + "\n")


# -- JSON formats -----------------------------------------------------------

def _load_json(path) -> dict:
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, path) from None
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", 1, path)
    return doc


def parse_qp(path) -> QpInstance:
    doc = _load_json(path)
    missing = [k for k in "qpak" if k not in doc]
    if missing:
        raise ParseError(f"missing field(s) {missing}", path=path)
    try:
        return QpInstance(doc["q"], doc["p"], doc["a"], doc["k"])
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), path=path) from None


def write_qp(inst: QpInstance, path):
    doc = {"q": inst.q.tolist(), "p": inst.p.tolist(), "a": inst.a.tolist(), "k": inst.k.tolist()}
    Path(path).write_text(json.dumps(doc) + "\n")


def parse_csp(path) -> CspInstance:
    doc = _load_json(path)
    if "domains" not in doc:
        raise ParseError("missing field 'domains'", path=path)
    cons = {}
    for c in doc.get("constraints", []):
        a, b = c["scope"]
        n = len(doc["domains"])
        if not (0 <= a < n and 0 <= b < n):
            raise BoundsError(f"constraint scope ({a}, {b}) outside 0..{n - 1}", path=path)
        key = (a, b)
        cons[key] = set(cons.get(key, set())) | {tuple(p) for p in c["forbidden"]}
    try:
        return CspInstance(tuple(tuple(d) for d in doc["domains"]), cons)
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from None


def write_csp(inst: CspInstance, path):
    doc = {
        "domains": [list(d) for d in inst.domains],
        "constraints": [
            {"scope": [a, b], "forbidden": sorted([list(p) for p in pairs])}
            for (a, b), pairs in sorted(inst.constraints.items())
        ],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def parse_dimacs_graph(path) -> tuple[int, list[tuple[int, int]]]:
    """DIMACS ``p edge`` graph; returns 0-indexed edges."""
    n = None
    edges = []
    last = 0
    for no, toks in _lines(_read(path)):
        last = no
        if toks[0] == "c":
            continue
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] not in ("edge", "col"):
                raise ParseError("expected 'p edge <nodes> <edges>'", no, path)
            n = _num(toks[2], no, path, int)
        elif toks[0] == "e":
            if n is None:
                raise ParseError("edge before the 'p edge' header", no, path)
            if len(toks) != 3:
                raise ParseError("expected 'e u v'", no, path)
            u, v = _num(toks[1], no, path, int), _num(toks[2], no, path, int)
            if not (1 <= u <= n and 1 <= v <= n):
                raise BoundsError(f"edge ({u}, {v}) outside 1..{n}", no, path)
            edges.append((u - 1, v - 1))
        else:
            raise ParseError(f"unknown line type {toks[0]!r}", no, path)
    if n is None:
        raise ParseError("missing 'p edge' header", last, path)
    return n, edges


def load_coloring(path, k: int) -> CspInstance:
    n, edges = parse_dimacs_graph(path)
    return CspInstance.coloring(n, [e for e in edges if e[0] != e[1]], k)


def ising_to_json(inst: IsingInstance) -> dict:
    return {"schema": SCHEMA_ISING, "j": inst.j.tolist(), "h": inst.h.tolist(), "offset": inst.offset}


def ising_from_json(doc: dict) -> IsingInstance:
    if doc.get("schema") != SCHEMA_ISING:
        raise ParseError(f"unsupported Ising schema {doc.get('schema')!r}")
    return IsingInstance(doc["j"], doc["h"], doc.get("offset", 0.0))


def parse_ising(path) -> IsingInstance:
    return ising_from_json(_load_json(path))
