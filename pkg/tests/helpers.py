"""Independent oracles and random generators shared by the test modules.

None of these touch the solver code paths they check.
"""

import itertools
import random

from llmlogic.clauses import Program

RESERVED = ("true", "false")


def random_horn(rng: random.Random, n_atoms: int, n_clauses: int,
                p_fact: float = 0.2, p_constraint: float = 0.08, max_body: int = 4):
    """Random Horn program over atoms a0..a{n-1} as (head, body) text pairs."""
    atoms = [f"a{i}" for i in range(n_atoms)]
    clauses = []
    for _ in range(n_clauses):
        r = rng.random()
        if r < p_fact:
            clauses.append((rng.choice(atoms), ["true"]))
            continue
        body = [rng.choice(atoms) for _ in range(rng.randint(1, max_body))]
        if rng.random() < 0.1:
            body.append("true")
        head = "false" if r < p_fact + p_constraint else rng.choice(atoms)
        clauses.append((head, body))
    return clauses


def naive_tp(clauses):
    """Least model by repeated full scans of the immediate-consequence operator."""
    model = {"true"}
    changed = True
    while changed:
        changed = False
        for head, body in clauses:
            if head not in model and all(b in model for b in body):
                model.add(head)
                changed = True
    return model


def brute_force_least_model(clauses):
    """Intersection of all models, by enumerating every truth assignment.

    ``false`` is treated as an ordinary atom so a program with a firing
    constraint still has a least model (containing ``false``).
    """
    atoms = sorted({a for h, b in clauses for a in (h, *b)} - {"true"})
    least = None
    for bits in itertools.product((False, True), repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        val["true"] = True
        if all(val[h] or not all(val[b] for b in body) for h, body in clauses):
            m = {a for a in atoms if val[a]}
            least = m if least is None else least & m
    return least | {"true"}


def falsified_by_derivation(dual_clauses, atom, path=frozenset()):
    """Recursive check for a finite falsification tree rooted at ``atom``."""
    if atom == "false":
        return True
    if atom in path:
        return False
    for premise, cons in dual_clauses:
        if premise == atom and all(
                falsified_by_derivation(dual_clauses, c, path | {atom}) for c in cons):
            return True
    return False


def random_dual(rng: random.Random, n_atoms: int, n_clauses: int, p_neg: float = 0.3):
    atoms = [f"d{i}" for i in range(n_atoms)]
    out = []
    for _ in range(n_clauses):
        p = rng.choice(atoms)
        if rng.random() < p_neg:
            out.append((p, ["false"]))
        else:
            out.append((p, [rng.choice(atoms) for _ in range(rng.randint(1, 3))]))
    return out


def program_size(p: Program) -> int:
    return sum(len(c[1]) + 1 for c in p.clauses)


def count_paths(succ, start):
    """Number of root-to-leaf derivations, by plain DFS over the rule graph."""
    total = 0
    stack = [start]
    while stack:
        q = stack.pop()
        for _, k in succ.get(q, ()):
            if k is None:
                total += 1
            else:
                stack.append(k)
    return total


def brute_force_least_model_np(clauses):
    """Vectorized variant of :func:`brute_force_least_model` for up to ~20 atoms."""
    import numpy as np

    atoms = sorted({a for h, b in clauses for a in (h, *b)} - {"true"})
    n = len(atoms)
    col = {a: i for i, a in enumerate(atoms)}
    grid = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    ok = np.ones(len(grid), dtype=bool)
    for h, body in clauses:
        fires = np.ones(len(grid), dtype=bool)
        for b in body:
            if b != "true":
                fires &= grid[:, col[b]]
        ok &= ~fires | grid[:, col[h]]
    least = grid[ok].all(axis=0)
    return {a for a, v in zip(atoms, least) if v} | {"true"}


def layered_program(n_clauses: int, width: int = 1000, seed: int = 0):
    """Synthetic layered Horn program: ``width`` facts, then two 3-atom clauses
    per head, each body drawn from the previous layer.  Built on raw ids."""
    import numpy as np

    from llmlogic.clauses import HornClause, Kind, SymbolTable

    rng = np.random.default_rng(seed)
    syms = SymbolTable()
    for i in range((n_clauses - width) // 2 + width):
        syms.intern_id(f"x{i}")
    base = 2
    clauses = [HornClause(base + i, (0,)) for i in range(width)]
    heads = base + width + np.arange(n_clauses - width) // 2
    lo = base + ((heads - base) // width - 1) * width
    bodies = lo[:, None] + rng.integers(0, width, size=(len(heads), 3))
    clauses += [HornClause(h, tuple(b)) for h, b in zip(heads.tolist(), bodies.tolist())]
    return Program(Kind.HORN, clauses, syms)
