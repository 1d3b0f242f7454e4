"""Inversion-free square-root iteration, classical baselines, and the
scalar convergence-region scan.

The main iteration keeps a pair ``(X, Y)`` with ``Y = I - A^{-1} X^2``
implicitly and advances both by multiplications only::

    X <- X (I + Y/2)        Y <- Y^2 (3/4 I + 1/4 Y)

Baselines (Denman-Beavers, Iannazzo, cyclic reduction, naive Newton and the
``A^{-1}``-based variant) run on dense arrays since each needs inverses.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels
from .config import DivergenceError, IterationState, SolveResult, SolverConfig
from .sparse import SparseMatrix, add_scaled, identity, one_norm, scale, spmm


def sqrt_norm_lower_bound(x, y, norm_a):
    """Lower bound on ``||A^{1/2}||_1`` from ``x = ||X_k||_1``, ``y = ||Y_k||_1``.

    Uses ``||A|| <= ||A^{1/2}||^2`` and ``||X_k|| <= ||A^{1/2}|| (2 - sqrt(1 - y))``;
    the second bound needs ``y < 1``.
    """
    if not norm_a > 0:
        raise ValueError("norm of A must be positive")
    base = math.sqrt(norm_a)
    if y < 1:
        return max(base, x / (2.0 - math.sqrt(1.0 - y)))
    return base


def _rounding_shrink(n):
    """Factor applied to computed ``||X_k||`` before it enters the lower bound.

    Near convergence ``X_k`` equals the root up to rounding, so the bound is
    tight and accumulated rounding (about n unit roundoffs) could push it past
    the true norm.
    """
    return max(0.0, 1.0 - 16.0 * (n + 1) * np.finfo(float).eps)


def initial_pair(a, alpha=0.5):
    """Scaled start ``X0 = sqrt(alpha/||A||) A`` and ``Y0 = I - (alpha/||A||) A``."""
    if a.nrows != a.ncols:
        raise ValueError("matrix must be square")
    norm = one_norm(a)
    if norm == 0:
        raise ValueError("cannot scale the zero matrix")
    c = alpha / norm
    x0 = scale(a, math.sqrt(c))
    y0 = add_scaled(identity(a.nrows), a, 1.0, -c)
    return x0, y0


def _half_product(x, y):
    return scale(spmm(x, y), 0.5)


def _y_update(p, y):
    return spmm(p, add_scaled(identity(y.nrows), y, 0.75, 0.25))


def siai_step(x, y):
    """One unfiltered step; returns ``(X', Y')``."""
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    s = _half_product(x, y)
    return add_scaled(x, s), _y_update(spmm(y, y), y)


def _check_finite(*mats):
    for m in mats:
        data = m.data if isinstance(m, SparseMatrix) else m
        if not np.all(np.isfinite(data)):
            raise DivergenceError("non-finite entry in iterate")


def _dense(a):
    if isinstance(a, SparseMatrix):
        return a.to_dense()
    a = np.array(a, dtype=np.float64, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return a


def _norm1(m):
    return float(np.abs(m).sum(axis=0).max()) if m.size else 0.0


def _inv(m):
    # singular iterates surface as LinAlgError
    return sla.inv(m, check_finite=False)


def _solve(a, b):
    return sla.solve(a, b, check_finite=False)


def _flushing(fn):
    """Run a dense solver with subnormals flushed to zero.

    Roots of banded matrices decay into the subnormal range away from the
    diagonal, where LAPACK and BLAS run several times slower. Values that
    small cannot affect any tolerance used here.
    """
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with kernels.flushed_subnormals():
            return fn(*args, **kwargs)
    return wrapper


def _dense_pair(a, alpha):
    norm = _norm1(a)
    if norm == 0:
        raise ValueError("cannot scale the zero matrix")
    c = alpha / norm
    return math.sqrt(c) * a, np.eye(a.shape[0]) - c * a


class _SparseOps:
    pair = staticmethod(initial_pair)
    norm = staticmethod(one_norm)
    half = staticmethod(_half_product)
    y_update = staticmethod(lambda y: _y_update(spmm(y, y), y))
    x_update = staticmethod(add_scaled)


class _DenseOps:
    pair = staticmethod(_dense_pair)
    norm = staticmethod(_norm1)
    half = staticmethod(lambda x, y: 0.5 * (x @ y))
    y_update = staticmethod(lambda y: (y @ y) @ (0.75 * np.eye(y.shape[0]) + 0.25 * y))
    x_update = staticmethod(lambda x, s: x + s)


def siai(a, cfg=None, callback=None):
    """Principal square root by the inversion-free iteration.

    Stops once ``||X_k Y_k / 2||_1 <= a_k * tol``, where ``a_k`` is 1 in
    absolute mode and a running lower bound on ``||A^{1/2}||_1`` otherwise.
    ``callback(state)`` is called with an :class:`IterationState` at k = 0
    and after every step.

    A :class:`SparseMatrix` runs on the CSR kernels; a 2-D array runs the
    same steps with dense BLAS products and returns an array.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(a, SparseMatrix):
        return _siai_dense(a, cfg, callback)
    return _siai_loop(a, cfg, callback, _SparseOps, a.nrows)


@_flushing
def _siai_dense(a, cfg, callback):
    a = _dense(a)
    return _siai_loop(a, cfg, callback, _DenseOps, a.shape[0])


def _siai_loop(a, cfg, callback, ops, n):
    x, y = ops.pair(a, cfg.alpha)
    norm_a = ops.norm(a)
    shrink = _rounding_shrink(n)
    bound = math.sqrt(norm_a) if cfg.relative else 1.0
    s = ops.half(x, y)
    residuals, k, converged = [], 0, False
    while True:
        _check_finite(x, y, s)
        if callback is not None:
            callback(IterationState(k, x, y, s, np.zeros(2), bound))
        if ops.norm(s) <= bound * cfg.tol:
            converged = True
            break
        if k == cfg.max_iters:
            break
        y = ops.y_update(y)
        x = ops.x_update(x, s)
        s = ops.half(x, y)
        k += 1
        residuals.append(ops.norm(s))
        if cfg.relative:
            y_norm = ops.norm(y)
            if y_norm < 1:
                bound = sqrt_norm_lower_bound(ops.norm(x) * shrink, y_norm, norm_a)
    return SolveResult(x, k, np.array(residuals), np.zeros(k), converged, "siai")


# -- dense baselines ---------------------------------------------------------

def _changed(new, old, tol):
    scale_ = _norm1(new)
    return _norm1(new - old) > tol * (scale_ if scale_ > 0 else 1.0)


def _run_change_loop(name, start, step, cfg, extract=lambda s: s[0]):
    """Iterate ``state <- step(state)`` until the extracted iterate stops moving."""
    state, history, converged = start, [], False
    for k in range(1, cfg.max_iters + 1):
        new = step(state)
        _check_finite(*new)
        old_x, new_x = extract(state), extract(new)
        change = _norm1(new_x - old_x) / max(_norm1(new_x), np.finfo(float).tiny)
        history.append(change)
        state = new
        if not _changed(new_x, old_x, cfg.tol):
            converged = True
            break
    iters = len(history)
    return SolveResult(extract(state), iters, np.array(history), np.zeros(iters), converged, name)


@_flushing
def db_iteration(a, cfg=None):
    """Denman-Beavers coupled iteration from ``X0 = A``, ``Y0 = I``."""
    cfg = cfg or SolverConfig()
    a = _dense(a)

    def step(state):
        x, y = state
        return 0.5 * (x + _inv(y)), 0.5 * (y + _inv(x))

    return _run_change_loop("db", (a, np.eye(a.shape[0])), step, cfg)


@_flushing
def in_iteration(a, cfg=None):
    """Iannazzo's Newton variant: ``X += H``, ``H <- -H X^{-1} H / 2``."""
    cfg = cfg or SolverConfig()
    a = _dense(a)
    eye = np.eye(a.shape[0])

    def step(state):
        x, h = state
        x_new = x + h
        return x_new, -0.5 * h @ _solve(x_new, h)

    return _run_change_loop("in", (a, 0.5 * (eye - a)), step, cfg)


@_flushing
def cr_iteration(a, cfg=None):
    """Cyclic-reduction iteration; ``Z_k / 4`` tends to ``A^{1/2}``."""
    cfg = cfg or SolverConfig()
    a = _dense(a)
    eye = np.eye(a.shape[0])

    def step(state):
        z, y = state
        w = y @ _solve(z, y)
        return z - 2.0 * w, -w

    res = _run_change_loop("cr", (2.0 * (eye + a), eye - a), step, cfg)
    res.root = 0.25 * res.root
    return res


@_flushing
def naive_newton(a, cfg=None):
    """``X <- (X + A X^{-1}) / 2`` from ``X0 = A``; unstable in general."""
    cfg = cfg or SolverConfig()
    a = _dense(a)

    def step(state):
        (x,) = state
        # A X^{-1} = (X^{-T} A^T)^T
        return (0.5 * (x + _solve(x.T, a.T).T),)

    return _run_change_loop("naive", (a,), step, cfg)


@_flushing
def inverse_newton_variant(a, cfg=None):
    """Newton on ``X^{-2} = A^{-1}`` with ``Y_k = I - A^{-1} X_k^2`` recomputed
    from one upfront inverse. Same start and stopping rule as :func:`siai`;
    only conditionally stable.
    """
    cfg = cfg or SolverConfig()
    a = _dense(a)
    n = a.shape[0]
    x, _ = _dense_pair(a, cfg.alpha)
    norm_a = _norm1(a)
    a_inv = _inv(a)
    eye = np.eye(n)
    y = eye - a_inv @ (x @ x)
    bound = math.sqrt(norm_a) if cfg.relative else 1.0
    s = 0.5 * x @ y
    residuals, k, converged = [], 0, False
    while True:
        _check_finite(x, y)
        if _norm1(s) <= bound * cfg.tol:
            converged = True
            break
        if k == cfg.max_iters:
            break
        x = x + s
        y = eye - a_inv @ (x @ x)
        s = 0.5 * x @ y
        k += 1
        residuals.append(_norm1(s))
        if cfg.relative:
            y_norm = _norm1(y)
            if y_norm < 1:
                bound = sqrt_norm_lower_bound(_norm1(x) * _rounding_shrink(n), y_norm, norm_a)
    return SolveResult(x, k, np.array(residuals), np.zeros(k), converged, "inverse_newton")


# -- scalar convergence region -----------------------------------------------

@dataclass(frozen=True)
class RegionSpec:
    alpha: float
    grid_n: int = 600
    max_steps: int = 200
    conv_tol: float = 1e-10

    def __post_init__(self):
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")


OUT_OF_DOMAIN = -1


@dataclass
class RegionScan:
    """Uniform grid over [-1, 1]^2; ``status[i, j]`` refers to
    ``z = re[j] + 1j*im[i]`` and is 1 (converged), 0, or ``OUT_OF_DOMAIN``.
    """

    spec: RegionSpec
    re: np.ndarray
    im: np.ndarray
    status: np.ndarray

    def points(self):
        """``(re, im, converged)`` for every in-disk point, row-major."""
        rr, ii = np.meshgrid(self.re, self.im)
        inside = self.status != OUT_OF_DOMAIN
        return rr[inside], ii[inside], self.status[inside]


def scan_convergence_region(spec):
    """Flag where ``y <- 3/4 y^2 + 1/4 y^3`` from ``y0 = 1 - alpha*z`` reaches
    ``|y| <= conv_tol`` within ``max_steps``, for ``z`` in the open unit disk.
    """
    axis = np.linspace(-1.0, 1.0, spec.grid_n)
    rr, ii = np.meshgrid(axis, axis)
    inside = rr * rr + ii * ii < 1.0
    flags = kernels.scan_region(
        np.ascontiguousarray(rr[inside]), np.ascontiguousarray(ii[inside]),
        float(spec.alpha), int(spec.max_steps), float(spec.conv_tol),
    )
    status = np.full(rr.shape, OUT_OF_DOMAIN, dtype=np.int8)
    status[inside] = flags
    return RegionScan(spec, axis, axis.copy(), status)
