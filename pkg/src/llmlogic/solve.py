"""Engine dispatch shared by the CLI and the exploration pipeline."""

from __future__ import annotations

from .clauses import Kind, Model, Program, Status
from .dual import contrapose
from .fixpoint import SolverOptions, minimal_model
from .matrix import matrix_model

ENGINES = ("fixpoint", "matrix")


def horn_model(p: Program, engine: str = "fixpoint", strict: bool = False,
               goal=None) -> Model:
    if engine == "fixpoint":
        return minimal_model(p, SolverOptions(strict_integrity=strict, stop_at_goal=goal))
    if engine == "matrix":
        m = matrix_model(p)
        if strict and not m.satisfiable:
            return Model(frozenset(), m.status, m.symbols)
        return m
    raise ValueError(f"unknown engine {engine!r}")


def model_atoms(p: Program, engine: str = "fixpoint", strict: bool = False) -> tuple[list[str], Status]:
    """Model atom texts in ascending intern id, plus the status.

    For a dual program these are the falsified source atoms.
    """
    if p.kind is Kind.HORN:
        m = horn_model(p, engine, strict)
        return m.names(), m.status
    horn, fmap = contrapose(p)
    m = horn_model(horn, engine)
    back = fmap.backward()
    ids = sorted(back[i] for i in m.true_atoms if i in back)
    return [p.symbols.text(i) for i in ids], m.status
