"""Filtered square-root iteration with adaptive drop thresholds.

Each step drops small entries from three intermediates (``Y^2``, the new
``Y`` and the new ``X``). The error this introduces in ``X`` and ``Y`` is
tracked to first order by a two-component envelope ``U``::

    U_{k+1} = T_k U_k + B_k V_k

where ``V_k`` holds the 1-norms actually dropped. Thresholds are chosen so
that, over the estimated number of remaining steps, the accumulated error
in ``X`` stays within the requested tolerance.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import IterationState, SolveResult, SolverConfig
from .iterations import (
    _check_finite,
    _half_product,
    _y_update,
    _rounding_shrink,
    initial_pair,
    sqrt_norm_lower_bound,
)
from .sparse import add_scaled, filter_matrix, identity, one_norm, spmm

__all__ = [
    "ErrorEnvelope",
    "FilterThresholds",
    "ResidualEstimate",
    "adaptive_thresholds",
    "envelope_step",
    "estimate_residual_iterations",
    "scaled_adjacency",
    "siai_f",
    "sqrt_norm_lower_bound",
]


def _amplification(x, y):
    return np.array([[1.0 + 0.5 * y, 0.5 * x], [0.0, (1.5 + 0.75 * y) * y]])


def _injection(y):
    return np.array([[0.0, 0.0, 1.0], [0.75 + 0.25 * y, 1.0, 0.0]])


@dataclass
class ErrorEnvelope:
    T: np.ndarray
    B: np.ndarray
    V: np.ndarray
    U: np.ndarray

    @classmethod
    def build(cls, x_prev, y_prev, V, U_prev):
        V = np.asarray(V, dtype=np.float64).reshape(3)
        U_prev = np.asarray(U_prev, dtype=np.float64).reshape(2)
        if x_prev < 0 or y_prev < 0 or np.any(V < 0) or np.any(U_prev < 0):
            raise ValueError("envelope inputs must be non-negative")
        return cls(_amplification(x_prev, y_prev), _injection(y_prev), V, U_prev)

    def advance(self):
        return self.T @ self.U + self.B @ self.V


def envelope_step(x_prev, y_prev, V, U_prev):
    """Propagate the error bound one step.

    ``x_prev``/``y_prev`` are the norms of the iterates the step started from;
    ``V`` = (dropped from Y^2, dropped from new Y, dropped from new X).
    """
    return ErrorEnvelope.build(x_prev, y_prev, V, U_prev).advance()


@dataclass(frozen=True)
class FilterThresholds:
    p_ft: float
    e_ft: float
    f_ft: float
    adaptive: bool = True

    def __post_init__(self):
        if not (self.p_ft > 0 and self.e_ft > 0 and self.f_ft > 0):
            raise ValueError("thresholds must be positive")

    @classmethod
    def fixed(cls, value):
        return cls(value, value, value, adaptive=False)


@dataclass
class ResidualEstimate:
    M: int
    phi: float
    x_path: np.ndarray
    y_path: np.ndarray
    Qtilde: np.ndarray


def estimate_residual_iterations(x0, y0, U, a, tol, cap=200):
    """Least ``M <= cap`` whose scalar shadow run leaves a positive budget.

    The shadow run replays the iteration on norms only:
    ``x <- x (1 + y/2)``, ``y <- y^2 (3/4 + y/4)``. With ``Q`` the product of
    the amplification matrices along it, the budget after ``M`` steps is
    ``a*tol - x_M y_M / 2 - (Q U)[0]``. Returns ``None`` if it never turns
    positive.
    """
    U = np.asarray(U, dtype=np.float64).reshape(2)
    budget = a * tol
    x, y = float(x0), float(y0)
    xs, ys = [x], [y]
    q = np.eye(2)
    for m in range(cap + 1):
        phi = budget - 0.5 * x * y - (q @ U)[0]
        if phi > 0:
            return ResidualEstimate(m, phi, np.array(xs), np.array(ys), q)
        if not math.isfinite(y) or y > 1e150:
            return None
        q = _amplification(x, y) @ q
        x, y = x * (1.0 + 0.5 * y), y * y * (0.75 + 0.25 * y)
        xs.append(x)
        ys.append(y)
    return None


def adaptive_thresholds(x, y, U, a, cfg):
    """Filtering budgets for one step from the current norms ``x``, ``y``.

    Falls back to ``fallback_C * tol`` for all three when ``y`` is above the
    gate, when no finite step count is predicted, or when the weights degenerate.
    """
    if x < 0 or y < 0 or not a > 0:
        raise ValueError("norms must be non-negative and a positive")
    fixed = FilterThresholds.fixed(cfg.fallback_C * cfg.tol)
    if y > cfg.y_fallback_threshold:
        return fixed
    est = estimate_residual_iterations(x, y, U, a, cfg.tol, cfg.max_iters)
    if est is None or est.M == 0:
        return fixed
    # errors injected now enter U one step later, then ride M-1 amplifications
    q = np.eye(2)
    for m in range(1, est.M):
        q = _amplification(est.x_path[m], est.y_path[m]) @ q
    c = q[0] @ _injection(y)
    if np.any(c <= 0):
        return fixed
    share = est.phi / (len(c) * est.M)
    return FilterThresholds(*(share / c))


def siai_f(a, cfg=None, callback=None):
    """Sparse square root with norm-bounded filtering.

    Stops when ``||S_k||_1 + U_k[0] <= a_k * tol``, so the returned ``X``
    is within tolerance of the exact root in the chosen error mode.
    ``callback`` receives an :class:`IterationState` after every step.
    """
    cfg = cfg or SolverConfig()
    x, y = initial_pair(a, cfg.alpha)
    norm_a = one_norm(a)
    shrink = _rounding_shrink(a.nrows)
    bound = math.sqrt(norm_a) if cfg.relative else 1.0
    s = _half_product(x, y)
    u = np.zeros(2)
    residuals, envelope, k = [], [], 0
    if callback is not None:
        callback(IterationState(k, x, y, s, u.copy(), bound))
    while one_norm(s) + u[0] > bound * cfg.tol:
        if k == cfg.max_iters:
            break
        x_norm, y_norm = one_norm(x), one_norm(y)
        th = adaptive_thresholds(x_norm, y_norm, u, bound, cfg)

        p, rep_p = filter_matrix(spmm(y, y), th.p_ft)
        y_new, rep_e = filter_matrix(_y_update(p, y), th.e_ft)
        x_new, rep_f = filter_matrix(add_scaled(x, s), th.f_ft)
        x, y = x_new, y_new
        s = _half_product(x, y)
        _check_finite(x, y, s)

        dropped = (rep_p.dropped_norm, rep_e.dropped_norm, rep_f.dropped_norm)
        u = envelope_step(x_norm, y_norm, dropped, u)
        k += 1
        residuals.append(one_norm(s))
        envelope.append(u[0])
        if cfg.relative:
            y_norm = one_norm(y)
            if y_norm < 1:
                # the filtered X may overshoot the exact iterate by up to U[0]
                x_low = max(one_norm(x) - u[0], 0.0) * shrink
                bound = sqrt_norm_lower_bound(x_low, y_norm, norm_a)
        if callback is not None:
            callback(IterationState(k, x, y, s, u.copy(), bound, th, (rep_p, rep_e, rep_f)))
    converged = one_norm(s) + u[0] <= bound * cfg.tol
    return SolveResult(x, k, np.array(residuals), np.array(envelope), converged, "siai_f")


def scaled_adjacency(b, rho_iters=100, rtol=1e-12):
    """``I - B / (2 rho)`` with ``rho`` the spectral radius of ``B`` from power
    iteration started at the ones vector.

    The estimate is ``||B x||_2`` for unit ``x``, which also settles on
    bipartite graphs where the dominant eigenvalue pair is ``+-rho``.
    """
    if b.nrows != b.ncols:
        raise ValueError("matrix must be square")
    if b.nnz == 0 or not np.any(b.data):
        raise ValueError("spectral radius of the zero matrix is zero")
    if np.any(b.data < 0):
        warnings.warn("negative entries; power iteration may not find the spectral radius",
                      RuntimeWarning, stacklevel=2)
    op = b.to_scipy()
    v = np.ones(b.nrows) / math.sqrt(b.nrows)
    rho = 0.0
    for _ in range(max(int(rho_iters), 1)):
        w = op @ v
        est = float(np.linalg.norm(w))
        if est == 0:
            raise ValueError("power iteration collapsed to zero; start vector is in the null space")
        done = abs(est - rho) <= rtol * est
        rho, v = est, w / est
        if done:
            break
    return add_scaled(identity(b.nrows), b, 1.0, -0.5 / rho)
