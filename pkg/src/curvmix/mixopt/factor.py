"""Recovery of the banded lower-triangular mixing matrix from its gram matrix."""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cholesky_banded

from curvmix.errors import NotPositiveDefiniteError

from .problem import MIN_PIVOT
from .types import BandedGram, MixingMatrix


def factor(x: BandedGram) -> MixingMatrix:
    """Return the lower-triangular ``C`` with ``C^T C = X`` and the band of ``X``.

    ``C^T C`` factors "from the bottom": with ``J`` the index reversal, the ordinary
    Cholesky factor ``L`` of ``J X J`` gives ``C = J L^T J``. The banded LAPACK routine
    keeps the cost at ``O(T b^2)``.

    Args:
        x: Positive-definite banded gram matrix.

    Returns:
        Mixing matrix with positive diagonal and unit-norm columns.
    """
    T, b = x.T, x.band  # noqa: N806
    flipped = x.entries[::-1, ::-1]
    # lower banded storage: ab[d, j] = flipped[j + d, j]
    ab = np.zeros((b, T))
    for d in range(b):
        ab[d, : T - d] = np.diagonal(flipped, offset=-d)
    try:
        lower_ab = cholesky_banded(ab, lower=True, check_finite=False)
    except LinAlgError as exc:
        message = "gram matrix is not positive definite"
        raise NotPositiveDefiniteError(message) from exc
    pivot = float(np.min(lower_ab[0])) ** 2
    if not pivot >= MIN_PIVOT:
        message = f"smallest Cholesky pivot {pivot:.3g} is below {MIN_PIVOT:.3g}"
        raise NotPositiveDefiniteError(message)

    lower = np.zeros((T, T))
    for d in range(b):
        index = np.arange(T - d)
        lower[index + d, index] = lower_ab[d, : T - d]
    return MixingMatrix(entries=np.ascontiguousarray(lower.T[::-1, ::-1]), band=b)
