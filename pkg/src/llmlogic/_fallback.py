"""Pure-Python versions of the kernels in ``_kernels.pyx``.

Used when the compiled extension is missing or ``LLMLOGIC_PURE_PYTHON`` is set.
"""

import itertools
from collections import deque

import numpy as np

FALSE_ID = 1
FLAG_FALSE = 1
FLAG_GOAL = 2


def horn_fixpoint(heads, body_ptr, body_idx, n_atoms, goal=-1, strict=False):
    heads = heads.tolist()
    ptr = body_ptr.tolist()
    idx = body_idx.tolist()
    n_clauses = len(heads)
    model = bytearray(n_atoms)
    if n_atoms == 0:
        return np.zeros(0, dtype=np.uint8), 0

    remaining = [0] * n_clauses
    watch = [[] for _ in range(n_atoms)]
    for c in range(n_clauses):
        body = set(idx[ptr[c]:ptr[c + 1]])
        remaining[c] = len(body)
        for a in body:
            watch[a].append(c)

    model[0] = 1
    flags = 0
    if goal == 0:
        return np.frombuffer(bytes(model), dtype=np.uint8).copy(), FLAG_GOAL
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for c in watch[a]:
            remaining[c] -= 1
            if remaining[c] == 0:
                h = heads[c]
                if model[h]:
                    continue
                model[h] = 1
                if h == goal:
                    if model[FALSE_ID]:
                        flags |= FLAG_FALSE
                    flags |= FLAG_GOAL
                    return np.frombuffer(bytes(model), dtype=np.uint8).copy(), flags
                if h == FALSE_ID:
                    flags |= FLAG_FALSE
                    if strict and goal < 0:
                        return np.frombuffer(bytes(model), dtype=np.uint8).copy(), flags
                queue.append(h)
    return np.frombuffer(bytes(model), dtype=np.uint8).copy(), flags


def csr_tp_step(indptr, indices, data, v_in, v_out, threshold):
    n = v_in.shape[0]
    contrib = data * v_in[indices]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    sums = np.bincount(rows, weights=contrib, minlength=n)
    fired = (sums >= threshold) | (v_in != 0)
    changed = int(np.count_nonzero(fired & (v_in == 0)))
    v_out[:] = fired
    return changed


def pack_horn(clauses):
    """Flatten ``(head, body)`` tuples into ``(heads, body_ptr, body_idx)`` arrays."""
    n = len(clauses)
    heads = np.fromiter((c[0] for c in clauses), dtype=np.int32, count=n)
    lengths = np.fromiter((len(c[1]) for c in clauses), dtype=np.int64, count=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    idx = np.fromiter(itertools.chain.from_iterable(c[1] for c in clauses),
                      dtype=np.int32, count=int(ptr[-1]))
    return heads, ptr, idx
