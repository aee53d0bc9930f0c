"""The mixing objective ``Tr(X^-1 G)`` and its gradient over the free entries."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky

from curvmix.errors import ArgumentError, NotPositiveDefiniteError

from .types import BandedGram, band_mask

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.workload import WorkloadMatrix

MIN_PIVOT = 1e-12


def cholesky_lower(x: NDArray[np.float64], min_pivot: float = MIN_PIVOT) -> NDArray[np.float64]:
    """Lower Cholesky factor of ``x``, rejecting pivots below ``min_pivot``.

    Raises:
        NotPositiveDefiniteError: When the factorization fails or a pivot is too small.
    """
    try:
        lower = cholesky(x, lower=True, check_finite=False)
    except LinAlgError as exc:
        message = "matrix is not positive definite"
        raise NotPositiveDefiniteError(message) from exc
    pivot = float(np.min(np.diag(lower))) ** 2
    if not pivot >= min_pivot:
        message = f"smallest Cholesky pivot {pivot:.3g} is below {min_pivot:.3g}"
        raise NotPositiveDefiniteError(message)
    return lower


def _check_dims(x: BandedGram, g: WorkloadMatrix) -> None:
    if x.T != g.T:
        message = f"gram size {x.T} does not match workload size {g.T}"
        raise ArgumentError(message)


def objective(x: BandedGram, g: WorkloadMatrix) -> float:
    """Return ``Tr(X^-1 G)`` through a Cholesky solve.

    Args:
        x: Positive-definite banded gram matrix.
        g: Workload of the same size.

    Returns:
        Objective value.
    """
    _check_dims(x, g)
    lower = cholesky_lower(x.entries)
    return float(np.trace(cho_solve((lower, True), g.entries, check_finite=False)))


def sandwich(
    lower: NDArray[np.float64],
    g: NDArray[np.float64],
) -> tuple[float, NDArray[np.float64]]:
    """Return ``Tr(X^-1 G)`` and ``X^-1 G X^-1`` from the Cholesky factor of ``X``."""
    left = cho_solve((lower, True), g, check_finite=False)
    both = cho_solve((lower, True), left.T, check_finite=False)
    return float(np.trace(left)), 0.5 * (both + both.T)


def objective_gradient(x: BandedGram, g: WorkloadMatrix) -> NDArray[np.float64]:
    """Gradient ``-X^-1 G X^-1`` restricted to the free pattern.

    The diagonal and every entry outside the band are zeroed. Moving a symmetric pair
    ``X[i, j] = X[j, i]`` together changes the objective at twice the rate of entry
    ``[i, j]`` of the returned matrix.

    Args:
        x: Positive-definite banded gram matrix.
        g: Workload of the same size.

    Returns:
        Symmetric banded ``T x T`` matrix with zero diagonal.
    """
    _check_dims(x, g)
    _, both = sandwich(cholesky_lower(x.entries), g.entries)
    grad = -both
    grad[~band_mask(x.T, x.band)] = 0.0
    np.fill_diagonal(grad, 0.0)
    return grad


def reduction_in_objective(g: WorkloadMatrix, x_approx: BandedGram, x_star: BandedGram) -> float:
    """Objective lost by using ``x_approx`` instead of ``x_star`` under workload ``g``."""
    if x_approx.T != x_star.T:
        message = f"gram sizes differ: {x_approx.T} vs {x_star.T}"
        raise ArgumentError(message)
    return objective(x_approx, g) - objective(x_star, g)
