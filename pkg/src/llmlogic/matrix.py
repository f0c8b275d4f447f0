"""Least models by iterated thresholded sparse matrix-vector products.

Row ``r`` of the square matrix defines column ``r``.  A conjunctive row for
a body of ``k`` distinct atoms holds ``k`` entries of weight ``1/k``, so the
row sum reaches 1 exactly when the whole body is true.  An atom defined by
``m > 1`` clauses gets one auxiliary column per clause plus a disjunctive
row with weight 1.0 on each auxiliary column.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import kernels
from .clauses import FALSE_ID, TRUE_ID, Kind, Model, Program, ProgramError, Status

EPSILON = 1e-9
THRESHOLD = 1.0 - EPSILON

CONJ = 1
DISJ = 2


@dataclass
class MatrixProgram:
    dim: int
    n_atoms: int
    indptr: np.ndarray    # int64, dim + 1
    indices: np.ndarray   # int32
    data: np.ndarray      # float64
    row_kind: np.ndarray  # uint8: 0 undefined, CONJ, DISJ
    v0: np.ndarray        # uint8, 1 at the "true" column only
    aux_owner: dict[int, int]
    program: Program

    def col_of(self, atom: int) -> int:
        # source atoms keep their intern id as column
        if not 0 <= atom < self.n_atoms:
            raise KeyError(atom)
        return atom

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def row(self, r: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[r], self.indptr[r + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()))

    def to_dense(self) -> np.ndarray:
        """Dense matrix, for debugging small programs only."""
        M = np.zeros((self.dim, self.dim))
        for r in range(self.dim):
            for c, w in self.row(r):
                M[r, c] += w
        return M


def encode(p: Program) -> MatrixProgram:
    if p.kind is not Kind.HORN:
        raise ProgramError("expected a horn program")
    n_atoms = len(p.symbols)
    defining: dict[int, list[tuple[int, ...]]] = defaultdict(list)
    for c in p.clauses:
        defining[c.head].append(tuple(dict.fromkeys(c.body)))

    rows: dict[int, tuple[int, list[int], list[float]]] = {}
    aux_owner: dict[int, int] = {}
    next_col = n_atoms
    for head in sorted(defining):
        bodies = defining[head]
        if len(bodies) == 1:
            b = bodies[0]
            rows[head] = (CONJ, list(b), [1.0 / len(b)] * len(b))
            continue
        aux_cols = []
        for b in bodies:
            col = next_col
            next_col += 1
            aux_owner[col] = head
            aux_cols.append(col)
            rows[col] = (CONJ, list(b), [1.0 / len(b)] * len(b))
        rows[head] = (DISJ, aux_cols, [1.0] * len(aux_cols))

    dim = next_col
    indptr = np.zeros(dim + 1, dtype=np.int64)
    kind = np.zeros(dim, dtype=np.uint8)
    for r, (k, cols, _) in rows.items():
        indptr[r + 1] = len(cols)
        kind[r] = k
    np.cumsum(indptr, out=indptr)
    nnz = int(indptr[-1])
    indices = np.empty(nnz, dtype=np.int32)
    data = np.empty(nnz, dtype=np.float64)
    for r, (_, cols, ws) in rows.items():
        lo = indptr[r]
        indices[lo:lo + len(cols)] = cols
        data[lo:lo + len(cols)] = ws
    v0 = np.zeros(dim, dtype=np.uint8)
    v0[TRUE_ID] = 1
    return MatrixProgram(dim, n_atoms, indptr, indices, data, kind, v0, aux_owner, p)


def _as_bits(m: MatrixProgram, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (m.dim,):
        raise ValueError(f"vector has shape {v.shape}, expected ({m.dim},)")
    return np.ascontiguousarray(v != 0, dtype=np.uint8)


def tp_step(m: MatrixProgram, v, backend: str | None = None) -> np.ndarray:
    """One application of the immediate-consequence operator, joined with ``v``."""
    vin = _as_bits(m, v)
    vin[TRUE_ID] = 1
    out = np.empty_like(vin)
    kernels.get_backend(backend).csr_tp_step(m.indptr, m.indices, m.data, vin, out, THRESHOLD)
    return out


def tp_fix(m: MatrixProgram, backend: str | None = None) -> np.ndarray:
    """Iterate :func:`tp_step` from ``v0`` until nothing changes.

    The iterates form an ascending chain of 0/1 vectors, so at most ``dim``
    productive steps occur.
    """
    step = kernels.get_backend(backend).csr_tp_step
    v = m.v0.copy()
    w = np.empty_like(v)
    for _ in range(m.dim + 1):
        if step(m.indptr, m.indices, m.data, v, w, THRESHOLD) == 0:
            return w
        v, w = w, v
    raise AssertionError("fixpoint not reached within dim steps")


def decode(m: MatrixProgram, v) -> Model:
    bits = _as_bits(m, v)
    src = bits[:m.n_atoms]
    ids = np.flatnonzero(src)
    atoms = frozenset(ids[ids > FALSE_ID].tolist())
    status = Status.UNSATISFIABLE if src[FALSE_ID] else Status.SATISFIABLE
    return Model(atoms, status, m.program.symbols)


def matrix_model(p: Program, backend: str | None = None) -> Model:
    m = p._cache.get("matrix")
    if m is None:
        m = p._cache["matrix"] = encode(p)
    return decode(m, tp_fix(m, backend))
