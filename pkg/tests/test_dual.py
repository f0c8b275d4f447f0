import random

import pytest

from llmlogic.clauses import FALSE_ID, TRUE_ID, Kind, Program, ProgramError, parse_program
from llmlogic.dual import PREFIX, contrapose, falsified_atoms, falsify
from llmlogic.fixpoint import minimal_model

from helpers import falsified_by_derivation, program_size, random_dual


def test_two_leaf_example():
    p = Program.dual([("a", ["b", "c"]), ("b", ["false"]), ("c", ["false"])])
    horn, fmap = contrapose(p)
    assert horn.kind is Kind.HORN
    assert horn.structure() == ("horn", (
        ("false:a", ("false:b", "false:c")),
        ("false:b", ("true",)),
        ("false:c", ("true",))))
    assert "false:a" in minimal_model(horn)
    assert fmap[FALSE_ID] == TRUE_ID


def test_unfalsified_leaf_blocks():
    p = Program.dual([("a", ["b", "c"]), ("b", ["false"])])
    horn, _ = contrapose(p)
    m = minimal_model(horn)
    assert "false:a" not in m and "false:b" in m
    assert not falsify(p, "a")


def test_no_negative_facts():
    assert not falsify(Program.dual([("a", ["b"])]), "a")


def test_tailgate(tailgate):
    assert len(tailgate) == 11
    horn, fmap = contrapose(tailgate)
    assert "false:tailgate when driving" in minimal_model(horn)
    assert falsify(tailgate, "tailgate when driving")


def test_fed(fixtures):
    p = parse_program((fixtures / "fed.pro").read_text())
    goal = "loosing the FED_s independence"
    clauses = [(p.symbols.text(c.premise), [p.symbols.text(x) for x in c.consequents])
               for c in p.clauses]
    expect = falsified_by_derivation(clauses, goal)
    assert falsify(p, goal) == expect
    # 'Eroded investor confidence' is refuted through its own consequences
    assert expect is True


def test_unknown_goal(tailgate):
    with pytest.raises(KeyError):
        falsify(tailgate, "not there")


def test_requires_dual(worked_prog):
    with pytest.raises(ProgramError):
        contrapose(worked_prog)


def test_map_injective_and_named(tailgate):
    horn, fmap = contrapose(tailgate)
    vals = [v for k, v in fmap.forward.items() if k != FALSE_ID]
    assert len(vals) == len(set(vals))
    for k, v in fmap.forward.items():
        if k != FALSE_ID:
            assert horn.symbols.text(v) == PREFIX + tailgate.symbols.text(k)


def test_multiple_clauses_any_suffices():
    p = Program.dual([("a", ["b"]), ("a", ["c"]), ("b", ["false"])])
    assert falsify(p, "a")


@pytest.mark.parametrize("seed", range(400))
def test_soundness_against_derivation_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 12)
    clauses = random_dual(rng, n, rng.randint(1, 2 * n))
    p = Program.dual(clauses)
    horn, _ = contrapose(p)
    # definite and size preserving
    assert all(c.head != FALSE_ID for c in horn.clauses)
    assert program_size(horn) == program_size(p)
    got = {p.symbols.text(i) for i in falsified_atoms(p)}
    atoms = {a for h, b in clauses for a in (h, *b)} - {"false"}
    expect = {a for a in atoms if falsified_by_derivation(clauses, a)}
    assert got == expect
    for a in atoms:
        assert falsify(p, a) == (a in expect)
