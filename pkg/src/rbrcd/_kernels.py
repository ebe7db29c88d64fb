"""Compiled inner loops for the row-by-row solver.

Factor rows are stored as fixed-width slot arrays ``cols[i, :p]`` /
``vals[i, :p]``; a column of -1 marks an empty slot. Every kernel releases
the GIL so several Python threads can sweep disjoint rows of the same
shared arrays concurrently.
"""

import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def compute_b(indptr, indices, d, lam, cols, vals, dtU, i, sigma, b):
    # b = -2 A_i U + 2 lam d_i (d^T U - d_i u_i) - sigma u_i
    k = b.shape[0]
    p = cols.shape[1]
    coef = 2.0 * lam * d[i]
    for c in range(k):
        b[c] = coef * dtU[c]
    for e in range(indptr[i], indptr[i + 1]):
        j = indices[e]
        for s in range(p):
            c = cols[j, s]
            if c >= 0:
                b[c] -= 2.0 * vals[j, s]
    for s in range(p):
        c = cols[i, s]
        if c >= 0:
            b[c] -= (coef * d[i] + sigma) * vals[i, s]


@njit(**_opts)
def solve_row(b, p, out_cols, out_vals):
    """Minimize ``b @ x`` over unit-norm nonnegative ``x`` with at most ``p``
    nonzeros. Ties go to the lowest column index."""
    k = b.shape[0]
    for s in range(out_cols.shape[0]):
        out_cols[s] = -1
        out_vals[s] = 0.0
    nneg = 0
    for c in range(k):
        if b[c] < 0.0:
            nneg += 1
    if nneg == 0:
        j0 = 0
        for c in range(1, k):
            if b[c] < b[j0]:
                j0 = c
        out_cols[0] = j0
        out_vals[0] = 1.0
        return
    # stable sort keeps lower indices first among equal magnitudes
    order = np.argsort(b, kind="mergesort")
    take = min(p, nneg)
    # scale by the largest magnitude first so tiny entries cannot underflow
    top = -b[order[0]]
    nrm = 0.0
    for s in range(take):
        v = -b[order[s]] / top
        out_cols[s] = order[s]
        out_vals[s] = v
        nrm += v * v
    nrm = np.sqrt(nrm)
    for s in range(take):
        out_vals[s] /= nrm


@njit(**_opts)
def sweep_rows(indptr, indices, d, lam, cols, vals, dtU, order, lo, hi, sigma, b, scratch):
    """Update rows ``order[lo:hi]`` in turn; return the summed squared change.

    ``scratch`` is a zeroed length-k work vector and is left zeroed.
    """
    p = cols.shape[1]
    new_c = np.empty(p, dtype=cols.dtype)
    new_v = np.empty(p, dtype=vals.dtype)
    delta = 0.0
    for t in range(lo, hi):
        i = order[t]
        compute_b(indptr, indices, d, lam, cols, vals, dtU, i, sigma, b)
        solve_row(b, p, new_c, new_v)
        di = d[i]
        for s in range(p):
            c = cols[i, s]
            if c >= 0:
                scratch[c] += vals[i, s]
                dtU[c] -= di * vals[i, s]
        for s in range(p):
            c = new_c[s]
            if c >= 0:
                scratch[c] -= new_v[s]
                dtU[c] += di * new_v[s]
        for s in range(p):
            c = cols[i, s]
            if c >= 0:
                delta += scratch[c] * scratch[c]
                scratch[c] = 0.0
        for s in range(p):
            c = new_c[s]
            if c >= 0:
                delta += scratch[c] * scratch[c]
                scratch[c] = 0.0
        for s in range(p):
            cols[i, s] = new_c[s]
            vals[i, s] = new_v[s]
    return delta


@njit(**_opts)
def accumulate_dtU(d, cols, vals, k):
    out = np.zeros(k)
    n, p = cols.shape
    for i in range(n):
        for s in range(p):
            c = cols[i, s]
            if c >= 0:
                out[c] += d[i] * vals[i, s]
    return out


@njit(**_opts)
def row_argmax(cols, vals):
    n, p = cols.shape
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        best_c = -1
        best_v = -1.0
        for s in range(p):
            c = cols[i, s]
            if c < 0:
                continue
            v = vals[i, s]
            if v > best_v or (v == best_v and c < best_c):
                best_v = v
                best_c = c
        out[i] = best_c
    return out


@njit(**_opts)
def round_rows(cols, vals):
    lab = row_argmax(cols, vals)
    n, p = cols.shape
    for i in range(n):
        for s in range(p):
            cols[i, s] = -1
            vals[i, s] = 0.0
        cols[i, 0] = lab[i]
        vals[i, 0] = 1.0


@njit(**_opts)
def objective(indptr, indices, d, lam, cols, vals, k):
    """<C, U U^T> with C = -(A - lam d d^T), diagonal included."""
    n, p = cols.shape
    dense = np.zeros(k)
    dtU = np.zeros(k)
    cross = 0.0
    for i in range(n):
        for s in range(p):
            c = cols[i, s]
            if c >= 0:
                dense[c] = vals[i, s]
                dtU[c] += d[i] * vals[i, s]
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            for s in range(p):
                c = cols[j, s]
                if c >= 0:
                    cross += dense[c] * vals[j, s]
        for s in range(p):
            c = cols[i, s]
            if c >= 0:
                dense[c] = 0.0
    return -cross + lam * np.dot(dtU, dtU)
