# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernels.

Every routine takes raw CSR triplets (int64 offsets, int64 columns, float64
values) and returns fresh arrays. Output rows are sorted by column and carry
no explicit zeros. The pure-numpy twins live in ``_pykernels``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

ctypedef cnp.int64_t idx_t


cdef struct keyed:
    double key
    idx_t pos


cdef int _cmp_idx(const void* a, const void* b) noexcept nogil:
    cdef idx_t x = (<const idx_t*>a)[0]
    cdef idx_t y = (<const idx_t*>b)[0]
    return (x > y) - (x < y)


cdef int _cmp_keyed(const void* a, const void* b) noexcept nogil:
    cdef const keyed* x = <const keyed*>a
    cdef const keyed* y = <const keyed*>b
    if x.key < y.key:
        return -1
    if x.key > y.key:
        return 1
    return (x.pos > y.pos) - (x.pos < y.pos)


def matmul(const idx_t[::1] ap, const idx_t[::1] aj, const double[::1] ax,
           const idx_t[::1] bp, const idx_t[::1] bj, const double[::1] bx,
           Py_ssize_t nrows, Py_ssize_t ncols):
    """Gustavson row-by-row product with a dense accumulator."""
    cdef Py_ssize_t i, ka, kb, k, j, p, w, start, cnt
    cdef double a
    cdef idx_t[::1] mark = np.full(ncols, -1, dtype=np.int64)
    cdef idx_t[::1] cp = np.zeros(nrows + 1, dtype=np.int64)

    with nogil:
        for i in range(nrows):
            cnt = 0
            for ka in range(ap[i], ap[i + 1]):
                k = aj[ka]
                for kb in range(bp[k], bp[k + 1]):
                    j = bj[kb]
                    if mark[j] != i:
                        mark[j] = i
                        cnt += 1
            cp[i + 1] = cp[i] + cnt

    cdef Py_ssize_t nnz = cp[nrows]
    cj_arr = np.empty(nnz, dtype=np.int64)
    cx_arr = np.empty(nnz, dtype=np.float64)
    out_p = np.zeros(nrows + 1, dtype=np.int64)
    cdef idx_t[::1] cj = cj_arr
    cdef double[::1] cx = cx_arr
    cdef idx_t[::1] op = out_p
    cdef double[::1] acc = np.zeros(ncols, dtype=np.float64)
    mark[:] = -1

    with nogil:
        w = 0
        for i in range(nrows):
            start = cp[i]
            p = start
            for ka in range(ap[i], ap[i + 1]):
                k = aj[ka]
                a = ax[ka]
                for kb in range(bp[k], bp[k + 1]):
                    j = bj[kb]
                    if mark[j] != i:
                        mark[j] = i
                        cj[p] = j
                        p += 1
                    acc[j] += a * bx[kb]
            if p - start > 1:
                qsort(&cj[start], p - start, sizeof(idx_t), _cmp_idx)
            # gather and compact in place; w never overtakes the read cursor
            for ka in range(start, p):
                j = cj[ka]
                if acc[j] != 0.0:
                    cj[w] = j
                    cx[w] = acc[j]
                    w += 1
                acc[j] = 0.0
            op[i + 1] = w

    return out_p, cj_arr[:w].copy(), cx_arr[:w].copy()


def add(const idx_t[::1] ap, const idx_t[::1] aj, const double[::1] ax,
        const idx_t[::1] bp, const idx_t[::1] bj, const double[::1] bx,
        double alpha, double beta, Py_ssize_t nrows, Py_ssize_t ncols):
    """Row-wise merge of ``alpha*A + beta*B``."""
    cdef Py_ssize_t i, pa, pb, ea, eb, w = 0
    cdef double v
    cdef idx_t ja
    cdef Py_ssize_t cap = aj.shape[0] + bj.shape[0]
    cj_arr = np.empty(cap, dtype=np.int64)
    cx_arr = np.empty(cap, dtype=np.float64)
    out_p = np.zeros(nrows + 1, dtype=np.int64)
    cdef idx_t[::1] cj = cj_arr
    cdef double[::1] cx = cx_arr
    cdef idx_t[::1] op = out_p

    with nogil:
        for i in range(nrows):
            pa = ap[i]
            ea = ap[i + 1]
            pb = bp[i]
            eb = bp[i + 1]
            while pa < ea or pb < eb:
                if pb >= eb or (pa < ea and aj[pa] < bj[pb]):
                    ja = aj[pa]
                    v = alpha * ax[pa]
                    pa += 1
                elif pa >= ea or bj[pb] < aj[pa]:
                    ja = bj[pb]
                    v = beta * bx[pb]
                    pb += 1
                else:
                    ja = aj[pa]
                    v = alpha * ax[pa] + beta * bx[pb]
                    pa += 1
                    pb += 1
                if v != 0.0:
                    cj[w] = ja
                    cx[w] = v
                    w += 1
            op[i + 1] = w

    return out_p, cj_arr[:w].copy(), cx_arr[:w].copy()


def column_filter(const idx_t[::1] indptr, const idx_t[::1] indices,
                  const double[::1] data, Py_ssize_t ncols, double bound,
                  double safety):
    """Mark entries to drop, smallest magnitude first within each column.

    An entry is dropped while ``running_sum * (1 + safety * count)`` stays
    at or below ``bound``; ``safety`` absorbs summation-order round-off so
    the dropped column sums never exceed ``bound`` however they are re-added.
    Returns a boolean keep-mask in CSR order.
    """
    cdef Py_ssize_t nnz = indices.shape[0]
    cdef Py_ssize_t nrows = indptr.shape[0] - 1
    cdef Py_ssize_t i, p, c, q, start, end, cnt
    cdef double s, t
    keep_arr = np.ones(nnz, dtype=np.bool_)
    cdef cnp.npy_bool[::1] keep = keep_arr
    cdef idx_t[::1] colptr = np.zeros(ncols + 1, dtype=np.int64)
    cdef idx_t[::1] fill = np.zeros(ncols, dtype=np.int64)
    cdef keyed* buf = <keyed*>malloc((nnz if nnz > 0 else 1) * sizeof(keyed))
    if buf == NULL:
        raise MemoryError()

    try:
        with nogil:
            for p in range(nnz):
                colptr[indices[p] + 1] += 1
            for c in range(ncols):
                colptr[c + 1] += colptr[c]
            for i in range(nrows):
                for p in range(indptr[i], indptr[i + 1]):
                    c = indices[p]
                    q = colptr[c] + fill[c]
                    fill[c] += 1
                    buf[q].key = fabs(data[p])
                    buf[q].pos = p
            for c in range(ncols):
                start = colptr[c]
                end = colptr[c + 1]
                if end - start > 1:
                    qsort(&buf[start], end - start, sizeof(keyed), _cmp_keyed)
                s = 0.0
                cnt = 0
                for q in range(start, end):
                    t = s + buf[q].key
                    if t * (1.0 + safety * (cnt + 2)) > bound:
                        break
                    s = t
                    cnt += 1
                    keep[buf[q].pos] = 0
    finally:
        free(buf)

    return keep_arr


def scan_region(const double[::1] re, const double[::1] im, double alpha,
                Py_ssize_t steps, double tol):
    """Run ``y <- 3/4 y^2 + 1/4 y^3`` from ``y0 = 1 - alpha*z`` per point."""
    cdef Py_ssize_t n = re.shape[0]
    cdef Py_ssize_t i, k
    cdef double u, v, su, sv, wu, wv, m2
    cdef double tol2 = tol * tol
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            u = 1.0 - alpha * re[i]
            v = -alpha * im[i]
            for k in range(steps):
                m2 = u * u + v * v
                # beyond |y| = 5 the cubic term dominates and |y| grows without bound
                if m2 <= tol2 or m2 > 25.0:
                    break
                su = u * u - v * v
                sv = 2.0 * u * v
                wu = 0.75 + 0.25 * u
                wv = 0.25 * v
                u = su * wu - sv * wv
                v = su * wv + sv * wu
            if u * u + v * v <= tol2:
                out[i] = 1
    return out_arr


cdef extern from *:
    """
    #if defined(__x86_64__) || defined(_M_X64) || defined(__SSE2__)
    #include <xmmintrin.h>
    static int sq_has_csr(void) { return 1; }
    static unsigned int sq_get_csr(void) { return _mm_getcsr(); }
    static void sq_set_csr(unsigned int v) { _mm_setcsr(v); }
    #else
    static int sq_has_csr(void) { return 0; }
    static unsigned int sq_get_csr(void) { return 0; }
    static void sq_set_csr(unsigned int v) { (void)v; }
    #endif
    """
    int sq_has_csr() nogil
    unsigned int sq_get_csr() nogil
    void sq_set_csr(unsigned int v) nogil


# flush-to-zero and denormals-are-zero bits of MXCSR
cdef unsigned int _FTZ_DAZ = 0x8040


def set_flush_subnormals(bint on):
    """Toggle hardware flushing of subnormal results for the calling thread.

    Returns the previous setting, or ``None`` where the control register is
    not available.
    """
    if not sq_has_csr():
        return None
    cdef unsigned int csr = sq_get_csr()
    previous = (csr & _FTZ_DAZ) == _FTZ_DAZ
    if on:
        sq_set_csr(csr | _FTZ_DAZ)
    else:
        sq_set_csr(csr & ~_FTZ_DAZ)
    return previous
