"""Solver settings, results and the per-iteration state passed to callbacks."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class DivergenceError(ArithmeticError):
    """An iterate picked up a NaN or infinity."""


class ErrorMode(str, Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"abs": cls.ABSOLUTE, "rel": cls.RELATIVE}
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-13
    error_mode: ErrorMode = ErrorMode.RELATIVE
    alpha: float = 0.5
    max_iters: int = 200
    fallback_C: float = 0.01
    # compared against ||Y||_1; set it negative to force the fixed thresholds
    y_fallback_threshold: float = 0.96

    def __post_init__(self):
        object.__setattr__(self, "error_mode", ErrorMode.parse(self.error_mode))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.fallback_C <= 1:
            raise ValueError("fallback_C must lie in (0, 1]")
        if not self.y_fallback_threshold < 1:
            raise ValueError("y_fallback_threshold must be below 1")

    @property
    def relative(self):
        return self.error_mode is ErrorMode.RELATIVE


@dataclass
class IterationState:
    """Snapshot handed to solver callbacks after each completed step."""

    k: int
    X: object
    Y: object
    S: object
    U: np.ndarray = field(default_factory=lambda: np.zeros(2))
    a: float = 1.0
    # filtered solver only: budgets used for the step and what each filter dropped
    thresholds: object = None
    reports: tuple = ()


@dataclass
class SolveResult:
    root: object
    iterations: int
    residual_history: np.ndarray
    error_bound_history: np.ndarray
    converged: bool
    method: str = ""
