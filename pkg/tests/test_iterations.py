import math

import numpy as np
import pytest

from conftest import dense_of, norm1, spd_matrix, sqrt_oracle
from sparsesqrt import (
    DivergenceError,
    RegionSpec,
    SolverConfig,
    SparseMatrix,
    cr_iteration,
    db_iteration,
    in_iteration,
    inverse_newton_variant,
    naive_newton,
    one_norm,
    relative_residual,
    scan_convergence_region,
    siai,
    tridiag,
)
from sparsesqrt.iterations import OUT_OF_DOMAIN, initial_pair, siai_step
from sparsesqrt.sparse import diag, identity

CFG = SolverConfig()


def test_initial_pair_formulas():
    a = tridiag(5)
    x0, y0 = initial_pair(a, 0.5)
    d = a.to_dense()
    na = norm1(d)
    np.testing.assert_allclose(x0.to_dense(), math.sqrt(0.5 / na) * d, rtol=1e-15)
    np.testing.assert_allclose(y0.to_dense(), np.eye(5) - 0.5 * d / na, rtol=1e-15)


def test_initial_pair_rejects_zero_and_rectangular():
    with pytest.raises(ValueError):
        initial_pair(SparseMatrix.from_dense(np.zeros((2, 2))))
    with pytest.raises(ValueError):
        initial_pair(SparseMatrix.from_dense(np.ones((2, 3))))


def test_step_matches_dense_formula():
    a = SparseMatrix.from_dense(spd_matrix(1, 8))
    x, y = initial_pair(a)
    xd, yd = x.to_dense(), y.to_dense()
    x1, y1 = siai_step(x, y)
    np.testing.assert_allclose(x1.to_dense(), xd @ (np.eye(8) + 0.5 * yd), rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(y1.to_dense(), 0.75 * yd @ yd + 0.25 * yd @ yd @ yd, atol=1e-15)


def test_identity_root_is_identity():
    res = siai(identity(4), CFG)
    assert res.converged
    np.testing.assert_allclose(res.root.to_dense(), np.eye(4), atol=1e-14)


def test_diagonal_root():
    res = siai(diag([4.0, 9.0]), CFG)
    np.testing.assert_allclose(res.root.to_dense(), np.diag([2.0, 3.0]), rtol=1e-14)
    assert len(res.residual_history) == res.iterations


def test_dense_and_sparse_paths_agree():
    a = tridiag(40)
    sparse = siai(a, CFG)
    dense = siai(a.to_dense(), CFG)
    assert sparse.iterations == dense.iterations
    np.testing.assert_allclose(sparse.root.to_dense(), dense.root, rtol=1e-13, atol=1e-15)


def test_commuting_iterates():
    a = SparseMatrix.from_dense(spd_matrix(3, 12))
    seen = []
    siai(a, CFG, callback=lambda st: seen.append((st.X.to_dense(), st.Y.to_dense())))
    for x, y in seen:
        assert norm1(x @ y - y @ x) <= 1e-12 * norm1(x) * norm1(y) + 1e-300


def test_residual_identity_holds():
    d = spd_matrix(4, 12)
    a = SparseMatrix.from_dense(d)
    seen = []
    siai(a, CFG, callback=lambda st: seen.append((st.X.to_dense(), st.Y.to_dense())))
    for x, y in seen:
        assert norm1(d @ y - (d - x @ x)) <= 1e-10 * norm1(d)


def test_y_norm_contracts_at_least_as_predicted():
    a = tridiag(60)
    norms = []
    siai(a, CFG, callback=lambda st: norms.append(one_norm(st.Y)))
    for y, y_next in zip(norms, norms[1:]):
        if y < 1:
            assert y_next <= 0.75 * y**2 + 0.25 * y**3 + 1e-15


@pytest.mark.parametrize("seed", range(4))
def test_methods_agree_pairwise(seed):
    a = spd_matrix(50 + seed, 30)
    roots = [dense_of(siai(SparseMatrix.from_dense(a), CFG).root)]
    roots += [f(a, CFG).root for f in (db_iteration, in_iteration, cr_iteration)]
    for r in roots[1:]:
        assert norm1(r - roots[0]) <= 1e-11 * norm1(roots[0])


@pytest.mark.parametrize("solver", [db_iteration, in_iteration, cr_iteration, naive_newton])
def test_baselines_on_small_spd(solver):
    a = spd_matrix(11, 10, cond_decades=1)
    res = solver(a, CFG)
    assert res.converged
    assert norm1(res.root - sqrt_oracle(a)) <= 1e-12 * norm1(sqrt_oracle(a))


def test_baselines_accept_sparse_input():
    res = db_iteration(tridiag(10), CFG)
    assert relative_residual(res.root, tridiag(10).to_dense()) < 1e-14


def test_inverse_variant_converges_when_well_conditioned():
    a = spd_matrix(12, 10, cond_decades=0.5)
    res = inverse_newton_variant(a, CFG)
    assert res.converged
    assert relative_residual(res.root, a) < 1e-13


def test_inverse_variant_singular_input():
    with pytest.raises(np.linalg.LinAlgError):
        inverse_newton_variant(np.array([[1.0, 1.0], [1.0, 1.0]]), CFG)


def test_negative_spectrum_diverges():
    with pytest.raises(DivergenceError):
        siai(SparseMatrix.from_dense(-np.eye(3)), CFG)


def test_iteration_cap_reports_nonconvergence():
    res = siai(tridiag(50), SolverConfig(max_iters=2))
    assert not res.converged
    assert res.iterations == 2


def test_absolute_mode_meets_tolerance():
    a = spd_matrix(21, 20)
    res = siai(SparseMatrix.from_dense(a), SolverConfig(tol=1e-10, error_mode="abs"))
    assert norm1(res.root.to_dense() - sqrt_oracle(a)) <= 1e-10


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(y_fallback_threshold=1.0)
    with pytest.raises(ValueError):
        SolverConfig(error_mode="bogus")
    assert SolverConfig(error_mode="abs").relative is False


# -- region scan -------------------------------------------------------------

def _region_oracle(alpha, n, steps=200, tol=1e-10):
    axis = np.linspace(-1, 1, n)
    grid = np.full((n, n), OUT_OF_DOMAIN)
    for i, b in enumerate(axis):
        for j, a in enumerate(axis):
            if a * a + b * b >= 1:
                continue
            y = complex(1 - alpha * a, -alpha * b)
            for _ in range(steps):
                y = 0.75 * y * y + 0.25 * y**3
                if abs(y) > 1e6:
                    break
            grid[i, j] = int(abs(y) <= tol)
    return grid


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 2.0])
def test_region_matches_complex_oracle(alpha):
    scan = scan_convergence_region(RegionSpec(alpha, grid_n=61))
    np.testing.assert_array_equal(scan.status, _region_oracle(alpha, 61))


def test_region_layout_and_center():
    scan = scan_convergence_region(RegionSpec(2.0, grid_n=101))
    assert scan.status.shape == (101, 101)
    assert scan.status[0, 0] == OUT_OF_DOMAIN
    i = int(np.argmin(np.abs(scan.im)))
    j = int(np.argmin(np.abs(scan.re - 0.5)))
    assert scan.status[i, j] == 1


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_region_contains_guaranteed_disk(alpha):
    re, im, flag = scan_convergence_region(RegionSpec(alpha, grid_n=201)).points()
    inside = (re - 1 / alpha) ** 2 + im**2 < (1 / alpha) ** 2
    assert flag[inside].all()


def test_region_spec_validation():
    with pytest.raises(ValueError):
        RegionSpec(0.5, grid_n=1)
    with pytest.raises(ValueError):
        RegionSpec(0.5, conv_tol=0)
