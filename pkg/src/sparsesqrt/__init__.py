"""Principal square roots of large sparse matrices by an inversion-free
Newton-type iteration, with optional norm-bounded filtering."""

from .analysis import (
    bandwidth_trajectory,
    eps_bandwidth_estimate,
    nu_bound,
    relative_residual,
    theorem5_bound,
)
from .config import DivergenceError, ErrorMode, IterationState, SolveResult, SolverConfig
from .filtering import (
    FilterThresholds,
    adaptive_thresholds,
    envelope_step,
    estimate_residual_iterations,
    scaled_adjacency,
    siai_f,
    sqrt_norm_lower_bound,
)
from .iterations import (
    RegionSpec,
    cr_iteration,
    db_iteration,
    in_iteration,
    inverse_newton_variant,
    naive_newton,
    scan_convergence_region,
    siai,
)
from .mmio import read_matrix_market, write_matrix_market
from .sparse import (
    FilterReport,
    SparseMatrix,
    bandwidth_l,
    filter_matrix,
    heuristic_real_bandwidth,
    identity,
    one_norm,
    tridiag,
)

__version__ = "0.1.0"
