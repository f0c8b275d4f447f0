"""Contrapositive compilation of Dual-Horn programs.

``p => c1 ; ... ; cn`` says that if ``p`` holds one of the ``ci`` holds, so
``p`` is falsified once every ``ci`` is.  Writing ``F(x)`` for "x is
falsified", each dual clause becomes the definite clause
``F(p) :- F(c1), ..., F(cn)`` with ``F(false) = true``; a negative fact
``p => false`` thus becomes the fact ``F(p) :- true``.  The falsified atoms
are the least model of the compiled program.
"""

from __future__ import annotations

from dataclasses import dataclass

from .clauses import (FALSE_ID, TRUE_ID, Atom, HornClause, Kind, Program,
                      ProgramError, SymbolTable)
from .fixpoint import SolverOptions, minimal_model

PREFIX = "false:"


def falsified_name(text: str) -> str:
    return PREFIX + text


@dataclass(frozen=True)
class FalsificationMap:
    """Source atom id -> id of its falsified counterpart in the compiled program."""

    forward: dict[int, int]

    def __getitem__(self, atom: int) -> int:
        return self.forward[atom]

    def backward(self) -> dict[int, int]:
        return {v: k for k, v in self.forward.items()}


def contrapose(p: Program) -> tuple[Program, FalsificationMap]:
    if p.kind is not Kind.DUAL:
        raise ProgramError("contrapose expects a dual program")
    syms = SymbolTable()
    forward: dict[int, int] = {FALSE_ID: TRUE_ID}
    src = p.symbols

    def F(a: int) -> int:
        i = forward.get(a)
        if i is None:
            i = forward[a] = syms.intern_id(falsified_name(src.text(a)))
        return i

    clauses = [HornClause(F(c.premise), tuple(F(x) for x in c.consequents))
               for c in p.clauses]
    return Program(Kind.HORN, clauses, syms), FalsificationMap(forward)


def falsified_atoms(p: Program) -> list[int]:
    """Source atoms (ascending id) falsified by the dual program ``p``."""
    horn, fmap = contrapose(p)
    model = minimal_model(horn)
    back = fmap.backward()
    return sorted(back[i] for i in model.true_atoms if i in back)


def falsify(p: Program, goal) -> bool:
    """True iff ``goal`` is constructively falsified by ``p``."""
    if isinstance(goal, Atom):
        goal = goal.text
    if isinstance(goal, str):
        g = p.symbols.get(goal)
        if g is None:
            raise KeyError(f"goal {goal!r} does not occur in the program")
    else:
        g = goal
    if g == FALSE_ID:
        return True
    horn, fmap = contrapose(p)
    target = fmap.forward.get(g)
    if target is None:
        # an atom that occurs nowhere in a clause cannot be falsified
        return False
    if target == TRUE_ID:
        return True
    model = minimal_model(horn, SolverOptions(stop_at_goal=target))
    return target in model

