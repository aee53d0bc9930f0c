"""The banded mixing-matrix problem: objective, solver, and factorization."""

from __future__ import annotations

from .factor import factor
from .problem import (
    MIN_PIVOT,
    cholesky_lower,
    objective,
    objective_gradient,
    reduction_in_objective,
)
from .solver import SolverOptions, solve_mixing
from .types import BandedGram, MixingMatrix, SolveReport, band_mask, free_indices

__all__ = [
    "MIN_PIVOT",
    "BandedGram",
    "MixingMatrix",
    "SolveReport",
    "SolverOptions",
    "band_mask",
    "cholesky_lower",
    "factor",
    "free_indices",
    "objective",
    "objective_gradient",
    "reduction_in_objective",
    "solve_mixing",
]
