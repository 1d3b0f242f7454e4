"""Matrix Market reading and writing for real matrices.

Reads ``coordinate`` and ``array`` layouts with ``general``, ``symmetric``
or ``skew-symmetric`` storage and ``real``, ``integer`` or ``pattern``
values. Writes general coordinate files with 17 significant digits, enough
for every double to survive a round trip.
"""

import numpy as np

from .sparse import SparseMatrix, compact


class MatrixMarketError(ValueError):
    def __init__(self, path, lineno, msg):
        where = f"{path}:{lineno}" if lineno else str(path)
        super().__init__(f"{where}: {msg}")
        self.lineno = lineno


_FIELDS = {"real", "double", "integer", "pattern"}
_SYMMETRY = {"general", "symmetric", "skew-symmetric"}


def _content_lines(fh, start):
    """Yield ``(lineno, stripped)`` for non-blank, non-comment lines."""
    for lineno, line in enumerate(fh, start=start):
        text = line.strip()
        if text and not text.startswith("%"):
            yield lineno, text


def read_matrix_market(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        header = fh.readline()
        parts = header.strip().lower().split()
        if len(parts) != 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix":
            raise MatrixMarketError(path, 1, "missing or malformed %%MatrixMarket header")
        layout, field, symmetry = parts[2:]
        if field == "complex":
            raise MatrixMarketError(path, 1, "complex matrices are not supported")
        if layout not in ("coordinate", "array"):
            raise MatrixMarketError(path, 1, f"unknown layout {layout!r}")
        if field not in _FIELDS:
            raise MatrixMarketError(path, 1, f"unknown field {field!r}")
        if symmetry not in _SYMMETRY:
            raise MatrixMarketError(path, 1, f"unsupported symmetry {symmetry!r}")
        if layout == "array" and field == "pattern":
            raise MatrixMarketError(path, 1, "pattern field needs coordinate layout")

        lines = _content_lines(fh, 2)
        try:
            lineno, size_line = next(lines)
        except StopIteration:
            raise MatrixMarketError(path, 0, "missing size line") from None
        sizes = _ints(path, lineno, size_line)
        if layout == "coordinate":
            if len(sizes) != 3:
                raise MatrixMarketError(path, lineno, "size line needs rows, columns and entry count")
            return _read_coordinate(path, lines, *sizes, field, symmetry)
        if len(sizes) != 2:
            raise MatrixMarketError(path, lineno, "size line needs rows and columns")
        return _read_array(path, lines, *sizes, symmetry)


def _ints(path, lineno, text):
    try:
        vals = [int(t) for t in text.split()]
    except ValueError:
        raise MatrixMarketError(path, lineno, f"expected integers, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise MatrixMarketError(path, lineno, "negative size")
    return vals


def _float(path, lineno, token):
    try:
        return float(token)
    except ValueError:
        raise MatrixMarketError(path, lineno, f"bad value {token!r}") from None


def _read_coordinate(path, lines, nrows, ncols, nnz, field, symmetry):
    if symmetry != "general" and nrows != ncols:
        raise MatrixMarketError(path, 0, f"{symmetry} matrix must be square")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.ones(nnz)
    want = 2 if field == "pattern" else 3
    count = 0
    for lineno, text in lines:
        if count == nnz:
            raise MatrixMarketError(path, lineno, f"more than the declared {nnz} entries")
        tok = text.split()
        if len(tok) != want:
            raise MatrixMarketError(path, lineno, f"expected {want} fields, got {len(tok)}")
        try:
            i, j = int(tok[0]), int(tok[1])
        except ValueError:
            raise MatrixMarketError(path, lineno, "bad index") from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketError(path, lineno, f"index ({i}, {j}) out of range")
        if symmetry != "general" and j > i:
            raise MatrixMarketError(path, lineno, "entry above the diagonal in symmetric storage")
        if symmetry == "skew-symmetric" and i == j:
            raise MatrixMarketError(path, lineno, "diagonal entry in skew-symmetric storage")
        rows[count], cols[count] = i - 1, j - 1
        if want == 3:
            vals[count] = _float(path, lineno, tok[2])
        count += 1
    if count != nnz:
        raise MatrixMarketError(path, 0, f"declared {nnz} entries, found {count}")
    if symmetry != "general":
        off = rows != cols
        sign = -1.0 if symmetry == "skew-symmetric" else 1.0
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, sign * vals[off]]),
        )
    return compact(SparseMatrix.from_coo(nrows, ncols, rows, cols, vals))


def _read_array(path, lines, nrows, ncols, symmetry):
    if symmetry != "general" and nrows != ncols:
        raise MatrixMarketError(path, 0, f"{symmetry} matrix must be square")
    # column-major; symmetric storage lists the lower triangle only
    if symmetry == "general":
        slots = [(i, j) for j in range(ncols) for i in range(nrows)]
    elif symmetry == "symmetric":
        slots = [(i, j) for j in range(ncols) for i in range(j, nrows)]
    else:
        slots = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
    dense = np.zeros((nrows, ncols))
    it = iter(slots)
    for lineno, text in lines:
        tok = text.split()
        if len(tok) != 1:
            raise MatrixMarketError(path, lineno, f"expected 1 value, got {len(tok)}")
        try:
            i, j = next(it)
        except StopIteration:
            raise MatrixMarketError(path, lineno, "more values than the matrix holds") from None
        v = _float(path, lineno, tok[0])
        dense[i, j] = v
        if symmetry == "symmetric":
            dense[j, i] = v
        elif symmetry == "skew-symmetric":
            dense[j, i] = -v
    if next(it, None) is not None:
        raise MatrixMarketError(path, 0, f"expected {len(slots)} values")
    return SparseMatrix.from_dense(dense)


def write_matrix_market(m, path, comment=None):
    """Write ``m`` as a general real coordinate file, 1-based."""
    rows = m.row_ids() + 1
    cols = m.indices + 1
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{m.nrows} {m.ncols} {m.nnz}\n")
        for i, j, v in zip(rows.tolist(), cols.tolist(), m.data.tolist()):
            fh.write(f"{i} {j} {v:.17g}\n")
