"""Sparsity diagnostics for square-root iterates.

Bounds on how far the root spreads (the binomial-series tail index and the
``(3^k + 1)/2`` growth of the bandwidth per step), an epsilon-bandwidth
estimate, and the relative residual ``||X^2 - A||_1 / ||A||_1``.
"""

import math
import sys
from dataclasses import dataclass

import numpy as np

from .config import SolverConfig
from .filtering import siai_f
from .iterations import siai
from .sparse import SparseMatrix, bandwidth_l, filter_matrix, heuristic_real_bandwidth, one_norm

_Y0_CAP = 1.0 - 1e-9
_TERM_RTOL = 1e-30
_MAX_TERMS = 100_000


@dataclass
class TailBoundTable:
    eps: float
    y0: float
    nu: int
    tail_values: np.ndarray  # tail_values[s] = sum_{j >= s} |C(1/2, j)| y0^j


def _binomial_terms(y0):
    """``|C(1/2, j)| y0^j`` for j = 0, 1, ... until negligible."""
    terms = [1.0]
    c, p = 1.0, 1.0
    for j in range(_MAX_TERMS):
        c *= abs(0.5 - j) / (j + 1)
        p *= y0
        t = c * p
        if t < _TERM_RTOL * terms[0] or t == 0.0:
            break
        terms.append(t)
    return np.array(terms)


def tail_table(eps, y0):
    """Tail sums of the binomial series of ``sqrt(1 - y)`` at ``y = y0`` and the cutoff index."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 <= y0 < 1:
        raise ValueError("y0 must lie in [0, 1)")
    y0 = min(y0, _Y0_CAP)
    terms = _binomial_terms(y0)
    # sum from the small end so the tails are accurate
    tails = np.cumsum(terms[::-1])[::-1]
    tails = np.append(tails, 0.0)
    target = math.sqrt(0.5) * eps
    nu = int(np.argmax(tails <= target))
    return TailBoundTable(eps, y0, max(nu, 1), tails)


def nu_bound(eps, y0):
    """Least ``s >= 1`` whose series tail from index ``s`` is at most ``eps / sqrt(2)``."""
    return tail_table(eps, y0).nu


def theorem5_bound(k, lA):
    """Bandwidth cap ``((3^k + 1) / 2) * lA`` after ``k`` steps, in exact integers."""
    if k < 0 or lA < 0:
        raise ValueError("k and lA must be non-negative")
    value = (3 ** int(k) + 1) // 2 * int(lA)
    if value > sys.maxsize:
        raise OverflowError(f"bandwidth bound for k={k} exceeds the platform integer range")
    return value


def eps_bandwidth_estimate(m, eps):
    """Upper estimate of the epsilon-bandwidth: drop up to ``eps * ||M||_1``
    then reorder. Not a minimum."""
    if not eps >= 0:
        raise ValueError("eps must be non-negative")
    if eps == 0:
        return heuristic_real_bandwidth(m)
    filtered, _ = filter_matrix(m, eps * one_norm(m))
    return min(heuristic_real_bandwidth(filtered), heuristic_real_bandwidth(m))


def relative_residual(x, a):
    """``||X^2 - A||_1 / ||A||_1`` for sparse or dense inputs."""
    if x.shape != a.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {a.shape}")
    xs = x.to_scipy() if isinstance(x, SparseMatrix) else np.asarray(x, dtype=np.float64)
    as_ = a.to_scipy() if isinstance(a, SparseMatrix) else np.asarray(a, dtype=np.float64)
    denom = _norm1(as_)
    if denom == 0:
        raise ValueError("residual is undefined for the zero matrix")
    return _norm1(xs @ xs - as_) / denom


def _norm1(m):
    if m.shape[0] == 0:
        return 0.0
    return float(np.asarray(abs(m).sum(axis=0)).max())


def bandwidth_trajectory(a, cfg=None, filtered=False):
    """Bandwidth of every ``X`` iterate, starting with ``X_0``."""
    cfg = cfg or SolverConfig()
    out = []
    solver = siai_f if filtered else siai
    solver(a, cfg, callback=lambda st: out.append(bandwidth_l(st.X)))
    return out
