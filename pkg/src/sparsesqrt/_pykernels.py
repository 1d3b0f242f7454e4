"""Pure numpy/scipy versions of the compiled kernels in ``_ckernels``.

Same signatures and same output conventions (sorted columns, no explicit
zeros). Used when the extension is not built or ``SPARSESQRT_PURE=1``.
"""

import numpy as np
import scipy.sparse as sp


def _from_scipy(m):
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return (
        m.indptr.astype(np.int64),
        m.indices.astype(np.int64),
        m.data.astype(np.float64),
    )


def matmul(ap, aj, ax, bp, bj, bx, nrows, ncols):
    inner = bp.shape[0] - 1
    a = sp.csr_matrix((ax, aj, ap), shape=(nrows, inner))
    b = sp.csr_matrix((bx, bj, bp), shape=(inner, ncols))
    return _from_scipy(a @ b)


def add(ap, aj, ax, bp, bj, bx, alpha, beta, nrows, ncols):
    a = sp.csr_matrix((ax, aj, ap), shape=(nrows, ncols))
    b = sp.csr_matrix((bx, bj, bp), shape=(nrows, ncols))
    return _from_scipy((alpha * a + beta * b).tocsr())


def column_filter(indptr, indices, data, ncols, bound, safety):
    nnz = indices.shape[0]
    keep = np.ones(nnz, dtype=bool)
    if nnz == 0:
        return keep
    mag = np.abs(data)
    # column-major, then by magnitude, then by CSR position for ties
    order = np.lexsort((np.arange(nnz), mag, indices))
    cols = indices[order]
    bounds = np.searchsorted(cols, np.arange(ncols + 1))
    for c in range(ncols):
        lo, hi = bounds[c], bounds[c + 1]
        if lo == hi:
            continue
        s = 0.0
        for cnt, q in enumerate(order[lo:hi]):
            t = s + mag[q]
            if t * (1.0 + safety * (cnt + 2)) > bound:
                break
            s = t
            keep[q] = False
    return keep


def scan_region(re, im, alpha, steps, tol):
    y = (1.0 - alpha * re) - 1j * (alpha * im)
    active = np.ones(y.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            yi = y[idx]
            mag = np.abs(yi)
            done = (mag <= tol) | (mag > 5.0)
            active[idx[done]] = False
            live = idx[~done]
            yl = y[live]
            y[live] = yl * yl * (0.75 + 0.25 * yl)
        return (np.abs(y) <= tol).astype(np.uint8)
