"""Least-model construction for Horn programs by counting propagation.

Each clause keeps a count of body atoms not yet known true; each atom keeps
the list of clauses watching it.  Proving an atom decrements the counters of
its watchers and a clause whose counter reaches zero proves its head.  Total
work is linear in the size of the program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .clauses import (FALSE_ID, TRUE_ID, Atom, Kind, Model, Program, ProgramError,
                      Status)


@dataclass(frozen=True)
class SolverOptions:
    """``strict_integrity`` discards the model when a constraint fires."""

    strict_integrity: bool = False
    stop_at_goal: int | None = None


@dataclass(frozen=True)
class CompiledHorn:
    heads: np.ndarray      # int32, one per clause
    body_ptr: np.ndarray   # int64, len = clauses + 1
    body_idx: np.ndarray   # int32, raw bodies (duplicates collapsed by the kernel)
    n_atoms: int


def compile_horn(p: Program) -> CompiledHorn:
    """Flat CSR arrays for ``p``, cached on the program."""
    if p.kind is not Kind.HORN:
        raise ProgramError("expected a horn program")
    cached = p._cache.get("horn")
    if cached is not None:
        return cached
    heads, ptr, idx = kernels.get_backend().pack_horn(list(p.clauses))
    compiled = CompiledHorn(heads, ptr, idx, len(p.symbols))
    p._cache["horn"] = compiled
    return compiled


def _resolve(p: Program, atom) -> int:
    if isinstance(atom, Atom):
        atom = atom.id
    if isinstance(atom, str):
        i = p.symbols.get(atom)
        if i is None:
            raise KeyError(f"unknown atom {atom!r}")
        return i
    if not 0 <= atom < len(p.symbols):
        raise KeyError(f"unknown atom id {atom}")
    return int(atom)


def minimal_model(p: Program, opts: SolverOptions | None = None,
                  backend: str | None = None) -> Model:
    """Least model of a Horn program.

    A fired integrity constraint makes the status unsatisfiable.  Lenient
    mode (the default) keeps the model; ``strict_integrity`` empties it.
    With ``stop_at_goal`` the run ends as soon as the goal is derived and the
    returned atoms are the part of the least model found so far.
    """
    opts = opts or SolverOptions()
    ch = compile_horn(p)
    goal = -1 if opts.stop_at_goal is None else _resolve(p, opts.stop_at_goal)
    k = kernels.get_backend(backend)
    vec, flags = k.horn_fixpoint(ch.heads, ch.body_ptr, ch.body_idx, ch.n_atoms,
                                 goal, bool(opts.strict_integrity))
    return model_from_vector(p, vec, flags, goal, opts.strict_integrity)


def model_from_vector(p: Program, vec: np.ndarray, flags: int, goal: int = -1,
                      strict: bool = False) -> Model:
    unsat = bool(flags & kernels.FLAG_FALSE)
    proved = goal if flags & kernels.FLAG_GOAL else None
    status = Status.UNSATISFIABLE if unsat else Status.SATISFIABLE
    if unsat and strict and proved is None:
        atoms: frozenset[int] = frozenset()
    else:
        ids = np.flatnonzero(vec)
        atoms = frozenset(ids[ids > FALSE_ID].tolist())
    return Model(atoms, status, p.symbols, proved)


def prove(p: Program, goal) -> bool:
    """True iff ``goal`` is in the lenient least model; stops early on success."""
    g = _resolve(p, goal)
    if g == TRUE_ID:
        return True
    m = minimal_model(p, SolverOptions(stop_at_goal=g))
    return g in m
