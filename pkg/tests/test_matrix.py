import random

import numpy as np
import pytest

from llmlogic.clauses import FALSE_ID, TRUE_ID, Program, ProgramError, Status, parse_program
from llmlogic.fixpoint import minimal_model
from llmlogic.matrix import (CONJ, DISJ, THRESHOLD, decode, encode, matrix_model, tp_fix,
                             tp_step)

from helpers import random_horn


def test_fact_row():
    m = encode(Program.horn([("r", ["true"])]))
    r = m.col_of(m.program.symbols.id("r"))
    assert m.row(r) == [(TRUE_ID, 1.0)]
    assert m.row_kind[r] == CONJ


def test_two_body_row():
    p = Program.horn([("q", ["r", "s"])])
    m = encode(p)
    ids = p.symbols.id
    assert m.row(ids("q")) == [(ids("r"), 0.5), (ids("s"), 0.5)]


def test_worked_structure(worked_prog):
    m = encode(worked_prog)
    ids = worked_prog.symbols.id
    p_row = m.row(ids("p"))
    assert m.row_kind[ids("p")] == DISJ
    assert len(p_row) == 2 and all(w == 1.0 for _, w in p_row)
    assert sorted(m.aux_owner) == sorted(c for c, _ in p_row)
    assert set(m.aux_owner.values()) == {ids("p")}
    assert m.dim == len(worked_prog.symbols) + 2
    assert m.row(FALSE_ID) == [(ids("q"), 1.0)]


def test_sparsity_count():
    rng = random.Random(3)
    for _ in range(100):
        clauses = random_horn(rng, rng.randint(3, 40), rng.randint(1, 80))
        p = Program.horn(clauses)
        m = encode(p)
        heads = {}
        for c in p.clauses:
            heads[c.head] = heads.get(c.head, 0) + 1
        body = sum(len(set(c.body)) for c in p.clauses)
        ors = sum(k for k in heads.values() if k > 1)
        assert m.nnz == body + ors


@pytest.mark.parametrize("k", range(1, 65))
def test_conjunctive_threshold_exhaustive(k):
    atoms = [f"b{i}" for i in range(k)]
    p = Program.horn([("h", atoms)])
    m = encode(p)
    h = p.symbols.id("h")
    cols = [p.symbols.id(a) for a in atoms]
    v = m.v0.copy()
    v[cols] = 1
    assert tp_step(m, v)[h] == 1
    assert sum(w for _, w in m.row(h)) >= THRESHOLD
    # every single missing atom blocks the row
    for c in cols:
        w = v.copy()
        w[c] = 0
        assert tp_step(m, w)[h] == 0


@pytest.mark.parametrize("m_clauses", [2, 3, 7])
def test_disjunctive_fires_on_any(m_clauses):
    p = Program.horn([("h", [f"x{i}"]) for i in range(m_clauses)])
    m = encode(p)
    h = p.symbols.id("h")
    for i in range(m_clauses):
        v = m.v0.copy()
        v[p.symbols.id(f"x{i}")] = 1
        v = tp_step(m, v)      # aux column
        v = tp_step(m, v)      # OR row
        assert v[h] == 1
    assert tp_step(m, m.v0)[h] == 0


def test_first_step_worked(worked_prog, backend):
    m = encode(worked_prog)
    w = tp_step(m, m.v0, backend)
    new = set(np.flatnonzero(w).tolist()) - set(np.flatnonzero(m.v0).tolist())
    assert new == {worked_prog.symbols.id("r")}


def test_step_at_fixpoint(worked_prog, backend):
    m = encode(worked_prog)
    v = tp_fix(m, backend)
    assert np.array_equal(tp_step(m, v, backend), v)


def test_step_is_monotone_join(backend):
    p = Program.horn([("a", ["b"])])
    m = encode(p)
    v = m.v0.copy()
    v[p.symbols.id("a")] = 1
    assert tp_step(m, v, backend)[p.symbols.id("a")] == 1


def test_no_clause_rows():
    p = Program.horn([("a", ["b"])])
    m = encode(p)
    assert np.array_equal(tp_fix(m), m.v0)
    assert decode(m, tp_fix(m)).names() == []


def test_dimension_mismatch(worked_prog):
    m = encode(worked_prog)
    with pytest.raises(ValueError):
        tp_step(m, np.zeros(m.dim + 1))


def test_requires_horn():
    with pytest.raises(ProgramError):
        encode(parse_program("a => false."))


def test_worked_model(worked_prog, backend):
    mm = matrix_model(worked_prog, backend)
    assert mm.names() == ["p", "r"] and mm.status is Status.SATISFIABLE


def test_chain_100(backend):
    clauses = [("a1", ["true"])] + [(f"a{i}", [f"a{i-1}"]) for i in range(2, 101)]
    p = Program.horn(clauses)
    m = encode(p)
    v, steps = m.v0.copy(), 0
    while True:
        w = tp_step(m, v, backend)
        if np.array_equal(w, v):
            break
        v, steps = w, steps + 1
    assert steps <= 100
    assert set(decode(m, v).names()) == {f"a{i}" for i in range(1, 101)}
    assert np.array_equal(tp_fix(m, backend), v)


def test_decode_unsat_and_no_aux(worked_prog):
    m = encode(worked_prog)
    v = np.ones(m.dim, dtype=np.uint8)
    d = decode(m, v)
    assert d.status is Status.UNSATISFIABLE
    assert all(i < m.n_atoms for i in d.true_atoms)


@pytest.mark.parametrize("chunk", range(10))
def test_oracle_equivalence(chunk, backend):
    rng = random.Random(chunk)
    for _ in range(100):
        n = rng.randint(3, 40)
        p = Program.horn(random_horn(rng, n, rng.randint(1, 3 * n)))
        a, b = minimal_model(p, backend=backend), matrix_model(p, backend)
        assert a.true_atoms == b.true_atoms and a.status == b.status
