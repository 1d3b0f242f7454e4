"""The compiled kernels and their numpy twins must agree bit for bit."""

import numpy as np
import pytest

from sparsesqrt import _pykernels, kernels
from sparsesqrt.sparse import SparseMatrix, tridiag

needs_ext = pytest.mark.skipif("cython" not in kernels.available(), reason="extension not built")


def _csr(rng, n, m, density):
    a = rng.standard_normal((n, m)) * (rng.random((n, m)) < density)
    s = SparseMatrix.from_dense(a)
    return s.indptr, s.indices, s.data


@pytest.fixture
def ck():
    from sparsesqrt import _ckernels

    return _ckernels


def test_backend_switching():
    before = kernels.BACKEND
    prev = kernels.use_backend("python")
    try:
        assert prev == before
        assert kernels.BACKEND == "python"
    finally:
        kernels.use_backend(before)
    with pytest.raises(ValueError, match="unknown"):
        kernels.use_backend("fortran")


@needs_ext
@pytest.mark.parametrize("seed", range(5))
def test_matmul_parity(ck, seed):
    rng = np.random.default_rng(seed)
    n, k, m = rng.integers(1, 30, size=3)
    a, b = _csr(rng, n, k, 0.3), _csr(rng, k, m, 0.3)
    got = ck.matmul(*a, *b, n, m)
    want = _pykernels.matmul(*a, *b, n, m)
    for g, w in zip(got, want):
        np.testing.assert_array_equal(g, w)


@needs_ext
@pytest.mark.parametrize("seed", range(5))
def test_add_parity(ck, seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 30, size=2)
    a, b = _csr(rng, n, m, 0.4), _csr(rng, n, m, 0.4)
    got = ck.add(*a, *b, 0.75, -2.0, n, m)
    want = _pykernels.add(*a, *b, 0.75, -2.0, n, m)
    for g, w in zip(got, want):
        np.testing.assert_array_equal(g, w)


@needs_ext
@pytest.mark.parametrize("seed", range(5))
def test_column_filter_parity(ck, seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 40, size=2)
    p, j, x = _csr(rng, n, m, 0.5)
    x = x * 10.0 ** rng.uniform(-8, 0, x.shape)
    # ties exercise the position tie-break
    x[::3] = 1e-4
    bound = 10.0 ** rng.uniform(-6, 0)
    np.testing.assert_array_equal(
        ck.column_filter(p, j, x, m, bound, 1e-15), _pykernels.column_filter(p, j, x, m, bound, 1e-15)
    )


@needs_ext
def test_scan_region_parity(ck):
    rng = np.random.default_rng(9)
    re, im = rng.uniform(-1, 1, 5000), rng.uniform(-1, 1, 5000)
    for alpha in (0.1, 0.5, 2.0):
        np.testing.assert_array_equal(
            ck.scan_region(re, im, alpha, 200, 1e-10), _pykernels.scan_region(re, im, alpha, 200, 1e-10)
        )


def test_scan_region_points():
    for be in kernels.available():
        prev = kernels.use_backend(be)
        try:
            out = kernels.scan_region(np.array([0.5, 1.0, -0.1]), np.zeros(3), 2.0, 200, 1e-10)
            # z = 1 gives y0 = -1, which lands on 1/2 after one step
            assert out.tolist() == [1, 1, 0]
            # y0 = 0.9 contracts
            assert kernels.scan_region(np.array([1.0]), np.zeros(1), 0.1, 200, 1e-10).tolist() == [1]
        finally:
            kernels.use_backend(prev)


@needs_ext
def test_solver_identical_across_backends():
    from sparsesqrt import SolverConfig, siai_f

    a = tridiag(300)
    results = {}
    for be in ("cython", "python"):
        prev = kernels.use_backend(be)
        try:
            r = siai_f(a, SolverConfig())
        finally:
            kernels.use_backend(prev)
        results[be] = r.root
    np.testing.assert_array_equal(results["cython"].indices, results["python"].indices)
    np.testing.assert_array_equal(results["cython"].data, results["python"].data)


def test_flushed_subnormals_restores_mode():
    tiny = np.array([1e-310])
    with kernels.flushed_subnormals():
        pass
    # outside the block subnormal arithmetic is back to IEEE behaviour
    assert (tiny * 1.0)[0] != 0.0
