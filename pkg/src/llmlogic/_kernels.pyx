# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the two model builders.

Same signatures and results as ``llmlogic._fallback``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8

DEF FALSE_ID = 1

FLAG_FALSE = 1
FLAG_GOAL = 2


def horn_fixpoint(const i32[::1] heads, const i64[::1] body_ptr, const i32[::1] body_idx,
                  Py_ssize_t n_atoms, Py_ssize_t goal=-1, bint strict=False):
    """Counting propagation over a Horn program in CSR form.

    Returns ``(model, flags)``: ``model`` is a uint8 vector over atoms,
    ``flags`` has bit 0 set when ``false`` was derived and bit 1 when
    ``goal`` was derived (propagation stops right there).  With ``strict``
    and no goal, propagation stops as soon as ``false`` is derived.
    """
    cdef Py_ssize_t n_clauses = heads.shape[0]
    cdef Py_ssize_t c, k, a, h, j, qhead = 0, qtail = 0
    cdef int flags = 0

    model_arr = np.zeros(n_atoms, dtype=np.uint8)
    cdef u8[::1] model = model_arr
    if n_atoms == 0:
        return model_arr, 0

    remaining_arr = np.zeros(n_clauses, dtype=np.int64)
    cdef i64[::1] remaining = remaining_arr
    mark_arr = np.full(n_atoms, -1, dtype=np.int64)
    cdef i64[::1] mark = mark_arr
    wptr_arr = np.zeros(n_atoms + 1, dtype=np.int64)
    cdef i64[::1] wptr = wptr_arr

    # distinct body atoms per clause; a body atom repeated in one clause counts once
    for c in range(n_clauses):
        for k in range(body_ptr[c], body_ptr[c + 1]):
            a = body_idx[k]
            if mark[a] != c:
                mark[a] = c
                remaining[c] += 1
                wptr[a + 1] += 1
    for a in range(n_atoms):
        wptr[a + 1] += wptr[a]

    widx_arr = np.empty(wptr[n_atoms], dtype=np.int32)
    cdef i32[::1] widx = widx_arr
    fill_arr = np.array(wptr_arr[:n_atoms], copy=True)
    cdef i64[::1] fill = fill_arr
    mark[:] = -1
    for c in range(n_clauses):
        for k in range(body_ptr[c], body_ptr[c + 1]):
            a = body_idx[k]
            if mark[a] != c:
                mark[a] = c
                widx[fill[a]] = <i32>c
                fill[a] += 1

    queue_arr = np.empty(n_atoms, dtype=np.int64)
    cdef i64[::1] queue = queue_arr
    model[0] = 1
    if goal == 0:
        return model_arr, FLAG_GOAL
    queue[qtail] = 0
    qtail += 1
    while qhead < qtail:
        a = queue[qhead]
        qhead += 1
        for j in range(wptr[a], wptr[a + 1]):
            c = widx[j]
            remaining[c] -= 1
            if remaining[c] == 0:
                h = heads[c]
                if model[h]:
                    continue
                model[h] = 1
                if h == goal:
                    if model[FALSE_ID]:
                        flags |= FLAG_FALSE
                    return model_arr, flags | FLAG_GOAL
                if h == FALSE_ID:
                    flags |= FLAG_FALSE
                    if strict and goal < 0:
                        return model_arr, flags
                queue[qtail] = h
                qtail += 1
    return model_arr, flags


def csr_tp_step(const i64[::1] indptr, const i32[::1] indices, const double[::1] data,
                const u8[::1] v_in, u8[::1] v_out, double threshold):
    """One thresholded product ``v_out = (M @ v_in >= threshold) | v_in``.

    Row ``r`` of the square CSR matrix defines column ``r``.  Rows are summed
    sequentially in stored order.  Returns the number of newly set entries.
    """
    cdef Py_ssize_t n = v_in.shape[0]
    cdef Py_ssize_t r, k
    cdef Py_ssize_t changed = 0
    cdef double s
    for r in range(n):
        if v_in[r]:
            v_out[r] = 1
            continue
        s = 0.0
        for k in range(indptr[r], indptr[r + 1]):
            if v_in[indices[k]]:
                s += data[k]
        if s >= threshold:
            v_out[r] = 1
            changed += 1
        else:
            v_out[r] = 0
    return changed


def pack_horn(list clauses):
    """Flatten ``(head, body)`` tuples into ``(heads, body_ptr, body_idx)`` arrays."""
    cdef Py_ssize_t n = len(clauses), i, j, total = 0, pos = 0
    cdef tuple clause, body
    for i in range(n):
        total += len(<tuple>(<tuple>clauses[i])[1])
    heads_arr = np.empty(n, dtype=np.int32)
    ptr_arr = np.empty(n + 1, dtype=np.int64)
    idx_arr = np.empty(total, dtype=np.int32)
    cdef i32[::1] heads = heads_arr
    cdef i64[::1] ptr = ptr_arr
    cdef i32[::1] idx = idx_arr
    ptr[0] = 0
    for i in range(n):
        clause = <tuple>clauses[i]
        heads[i] = <i32>clause[0]
        body = <tuple>clause[1]
        for j in range(len(body)):
            idx[pos] = <i32>body[j]
            pos += 1
        ptr[i + 1] = pos
    return heads_arr, ptr_arr, idx_arr
