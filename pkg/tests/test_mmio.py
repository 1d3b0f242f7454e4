import numpy as np
import pytest

from sparsesqrt import SparseMatrix, read_matrix_market, write_matrix_market
from sparsesqrt.mmio import MatrixMarketError
from sparsesqrt.sparse import identity


def _write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_single_entry(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 4.0\n")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[4.0]])


def test_symmetric_expansion(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n% note\n2 2 3\n1 1 2\n2 1 -1\n2 2 2\n")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[2, -1], [-1, 2]])


def test_skew_and_pattern(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[0, -3], [3, 0]])
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n", "p.mtx")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def test_array_layout(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[1, 3], [2, 4]])
    p = _write(tmp_path, "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n4\n", "s.mtx")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[1, 2], [2, 4]])


def test_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(17)
    a = rng.standard_normal((30, 20)) * 10.0 ** rng.uniform(-300, 300, (30, 20))
    a *= rng.random((30, 20)) < 0.3
    m = SparseMatrix.from_dense(a)
    p = tmp_path / "r.mtx"
    write_matrix_market(m, p)
    back = read_matrix_market(p)
    np.testing.assert_array_equal(back.indptr, m.indptr)
    np.testing.assert_array_equal(back.indices, m.indices)
    assert back.data.tobytes() == m.data.tobytes()


def test_empty_and_identity_round_trip(tmp_path):
    empty = SparseMatrix.from_dense(np.zeros((3, 4)))
    write_matrix_market(empty, tmp_path / "e.mtx")
    lines = (tmp_path / "e.mtx").read_text().splitlines()
    assert lines[-1] == "3 4 0"
    assert read_matrix_market(tmp_path / "e.mtx").shape == (3, 4)
    write_matrix_market(identity(5), tmp_path / "i.mtx")
    np.testing.assert_array_equal(read_matrix_market(tmp_path / "i.mtx").to_dense(), np.eye(5))


def test_writer_uses_one_based_indices(tmp_path):
    write_matrix_market(SparseMatrix.from_coo(2, 2, [1], [0], [0.1]), tmp_path / "o.mtx")
    assert (tmp_path / "o.mtx").read_text().splitlines()[-1] == "2 1 0.10000000000000001"


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", 1, "complex"),
        ("not a header\n", 1, "header"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n", 3, "bad index"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", 3, "out of range"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", 3, "bad value"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n% c\n1 1 1\n2 2 2\n", 5, "more than"),
        ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2, "size line"),
        ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n", 3, "above the diagonal"),
    ],
)
def test_parse_errors_carry_line_numbers(tmp_path, text, line, fragment):
    p = _write(tmp_path, text)
    with pytest.raises(MatrixMarketError, match=fragment) as info:
        read_matrix_market(p)
    assert info.value.lineno == line
    assert f":{line}:" in str(info.value)


def test_short_file(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n")
    with pytest.raises(MatrixMarketError, match="found 1"):
        read_matrix_market(p)
