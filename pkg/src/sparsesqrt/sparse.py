"""CSR storage, arithmetic, norm-bounded filtering and bandwidth measures."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from . import kernels

# Per-entry slack in the filter's acceptance test. A sum of m terms computed
# in any order differs from the exact sum by at most (m-1)*u relative, so
# padding by 3u per term keeps every re-summation of the dropped part
# under the bound.
_SUM_SAFETY = 3.0 * 2.0**-53


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Real matrix in compressed sparse row form.

    Rows are sorted by column and hold no duplicates. Instances are treated
    as immutable; every operation returns a new matrix.
    """

    nrows: int
    ncols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indptr", np.ascontiguousarray(self.indptr, dtype=np.int64))
        object.__setattr__(self, "indices", np.ascontiguousarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if self.indptr.shape != (self.nrows + 1,):
            raise ValueError("row offsets must have length nrows + 1")
        if self.indices.shape != self.data.shape:
            raise ValueError("column indices and values differ in length")

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.indices.shape[0])

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    def validate(self):
        """Raise ``ValueError`` unless every CSR invariant holds."""
        p = self.indptr
        if p[0] != 0 or p[-1] != self.nnz or np.any(np.diff(p) < 0):
            raise ValueError("malformed row offsets")
        if self.nnz:
            if self.indices.min() < 0 or self.indices.max() >= self.ncols:
                raise ValueError("column index out of range")
            rows = self.row_ids()
            same_row = rows[1:] == rows[:-1]
            if np.any(same_row & (np.diff(self.indices) <= 0)):
                raise ValueError("columns not strictly increasing within a row")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("non-finite stored value")
        return self

    def row_ids(self):
        return np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr))

    def to_dense(self):
        out = np.zeros(self.shape)
        np.add.at(out, (self.row_ids(), self.indices), self.data)
        return out

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    @classmethod
    def from_scipy(cls, m):
        m = sp.csr_matrix(m, dtype=np.float64, copy=True)
        m.sum_duplicates()
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = np.nonzero(a)
        indptr = np.zeros(a.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=a.shape[0]), out=indptr[1:])
        return cls(a.shape[0], a.shape[1], indptr, cols, a[rows, cols])

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, values):
        """Build from triplets; duplicates are summed."""
        m = sp.coo_matrix((values, (rows, cols)), shape=(nrows, ncols)).tocsr()
        return cls.from_scipy(m)


@dataclass(frozen=True)
class FilterReport:
    dropped_norm: float
    dropped_count: int
    threshold_used: float


def identity(n):
    idx = np.arange(n, dtype=np.int64)
    return SparseMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def diag(values):
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    keep = values != 0
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(keep, out=indptr[1:])
    return SparseMatrix(n, n, indptr, np.flatnonzero(keep), values[keep])


def tridiag(n, lam=-1.0):
    """The finite-difference family: ``1 - 2*lam`` on the diagonal, ``lam`` beside it."""
    main = np.full(n, 1.0 - 2.0 * lam)
    off = np.full(max(n - 1, 0), float(lam))
    m = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="csr")
    return SparseMatrix.from_scipy(m)


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def one_norm(m):
    """Maximum absolute column sum."""
    if m.nnz == 0:
        return 0.0
    sums = np.bincount(m.indices, weights=np.abs(m.data), minlength=m.ncols)
    return float(sums.max())


def compact(m):
    """Drop explicitly stored zeros."""
    keep = m.data != 0
    if keep.all():
        return m
    return _masked(m, keep)


def _masked(m, keep):
    counts = np.bincount(m.row_ids()[keep], minlength=m.nrows)
    indptr = np.zeros(m.nrows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return SparseMatrix(m.nrows, m.ncols, indptr, m.indices[keep], m.data[keep])


def scale(m, c):
    if c == 0:
        return SparseMatrix(m.nrows, m.ncols, np.zeros(m.nrows + 1, np.int64), [], [])
    return SparseMatrix(m.nrows, m.ncols, m.indptr, m.indices, m.data * c)


def spmm(a, b):
    """Sparse product ``a @ b`` with sorted columns and no stored zeros."""
    if a.ncols != b.nrows:
        raise ValueError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    p, j, x = kernels.matmul(
        a.indptr, a.indices, a.data, b.indptr, b.indices, b.data, a.nrows, b.ncols
    )
    return SparseMatrix(a.nrows, b.ncols, p, j, x)


def add_scaled(a, b, beta_a=1.0, beta_b=1.0):
    """``beta_a*a + beta_b*b``, compacted."""
    _check_same_shape(a, b)
    p, j, x = kernels.add(
        a.indptr, a.indices, a.data, b.indptr, b.indices, b.data,
        float(beta_a), float(beta_b), a.nrows, a.ncols,
    )
    return SparseMatrix(a.nrows, a.ncols, p, j, x)


def filter_matrix(m, bound):
    """Drop small entries so that the dropped part has 1-norm at most ``bound``.

    Within each column entries are removed smallest first while the running
    absolute sum fits the budget. Since the 1-norm is the largest column
    sum, the guarantee holds for the whole matrix.
    """
    if not bound >= 0:
        raise ValueError("filter bound must be non-negative")
    if bound == 0 or m.nnz == 0:
        return m, FilterReport(0.0, 0, 0.0)
    keep = kernels.column_filter(m.indptr, m.indices, m.data, m.ncols, float(bound), _SUM_SAFETY)
    dropped = ~keep
    n_drop = int(dropped.sum())
    if n_drop == 0:
        return m, FilterReport(0.0, 0, 0.0)
    mag = np.abs(m.data[dropped])
    sums = np.bincount(m.indices[dropped], weights=mag, minlength=m.ncols)
    report = FilterReport(float(sums.max()), n_drop, float(mag.max()))
    return _masked(m, keep), report


def bandwidth_l(m):
    """Upper plus lower extent of the stored nonzeros (0 when diagonal or empty)."""
    if m.nrows != m.ncols:
        raise ValueError("bandwidth is defined for square matrices")
    nz = m.data != 0
    if not nz.any():
        return 0
    offset = m.indices[nz] - m.row_ids()[nz]
    return int(max(offset.max(), 0) + max(-offset.min(), 0))


def permute(m, perm):
    """Symmetric permutation ``P M P^T`` with ``perm[new] = old``."""
    perm = np.asarray(perm)
    s = m.to_scipy()[perm][:, perm]
    return SparseMatrix.from_scipy(s)


def heuristic_real_bandwidth(m):
    """Upper bound on the minimum bandwidth over symmetric permutations.

    Uses reverse Cuthill-McKee on the symmetrized pattern and never reports
    more than the bandwidth of the given ordering.
    """
    base = bandwidth_l(m)
    if base == 0:
        return 0
    m = compact(m)
    pattern = m.to_scipy()
    pattern.data = np.ones_like(pattern.data)
    pattern = (pattern + pattern.T).tocsr()
    perm = reverse_cuthill_mckee(pattern, symmetric_mode=True)
    return min(base, bandwidth_l(permute(m, perm)))
