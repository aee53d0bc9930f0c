"""Banded gram matrices, mixing matrices, and solver reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from curvmix.errors import ArgumentError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


def free_indices(T: int, band: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:  # noqa: N803
    """Row and column indices of the free entries: upper triangle, in band, off diagonal."""
    rows, cols = np.triu_indices(T, k=1)
    keep = cols - rows < band
    return rows[keep], cols[keep]


def band_mask(T: int, band: int) -> NDArray[np.bool_]:  # noqa: N803
    """Boolean ``T x T`` mask of the entries with ``|i - j| < band``."""
    index = np.arange(T)
    return np.abs(np.subtract.outer(index, index)) < band


@dataclass(frozen=True)
class BandedGram:
    """Symmetric ``X = C^T C`` with unit diagonal and bandwidth ``band``."""

    entries: NDArray[np.float64]
    band: int

    def __post_init__(self) -> None:
        x = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", x)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            message = f"gram matrix must be square, got shape {x.shape}"
            raise ArgumentError(message)
        if not 1 <= self.band <= x.shape[0]:
            message = f"band={self.band} outside [1, {x.shape[0]}]"
            raise ArgumentError(message)
        if not np.array_equal(np.diag(x), np.ones(x.shape[0])):
            message = "gram matrix must have a unit diagonal"
            raise ArgumentError(message)
        if np.any(x[~band_mask(x.shape[0], self.band)] != 0.0):
            message = f"gram matrix has entries outside band {self.band}"
            raise ArgumentError(message)
        if not np.array_equal(x, x.T):
            message = "gram matrix must be symmetric"
            raise ArgumentError(message)

    @property
    def T(self) -> int:  # noqa: N802
        """Matrix size."""
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, T: int, band: int = 1) -> BandedGram:  # noqa: N803
        """The feasible point ``X = I``."""
        return cls(entries=np.eye(T), band=band)

    @classmethod
    def from_free(cls, values: ArrayLike, T: int, band: int) -> BandedGram:  # noqa: N803
        """Assemble ``X`` from its free upper-triangle entries in row-major order."""
        rows, cols = free_indices(T, band)
        x = np.eye(T)
        x[rows, cols] = values
        x[cols, rows] = values
        return cls(entries=x, band=band)

    def free_values(self) -> NDArray[np.float64]:
        """Free upper-triangle entries in row-major order."""
        rows, cols = free_indices(self.T, self.band)
        return self.entries[rows, cols].copy()


@dataclass(frozen=True)
class MixingMatrix:
    """Lower-triangular banded ``C`` whose columns have unit norm when ``X = C^T C``."""

    entries: NDArray[np.float64]
    band: int

    def __post_init__(self) -> None:
        c = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", c)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            message = f"mixing matrix must be square, got shape {c.shape}"
            raise ArgumentError(message)
        if not 1 <= self.band <= c.shape[0]:
            message = f"band={self.band} outside [1, {c.shape[0]}]"
            raise ArgumentError(message)
        lower_band = np.tril(band_mask(c.shape[0], self.band))
        if np.any(c[~lower_band] != 0.0):
            message = f"mixing matrix must be lower-triangular with band {self.band}"
            raise ArgumentError(message)

    @property
    def T(self) -> int:  # noqa: N802
        """Matrix size."""
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, T: int) -> MixingMatrix:  # noqa: N803
        """Independent-noise mixing matrix ``C = I``."""
        return cls(entries=np.eye(T), band=1)

    def gram(self) -> NDArray[np.float64]:
        """Return ``C^T C``."""
        return self.entries.T @ self.entries


@dataclass
class SolveReport:
    """Outcome of a mixing-matrix solve.

    Attributes:
        objective_value: ``Tr(X^-1 G)`` at the returned iterate.
        iterations: Accepted quasi-Newton steps.
        kkt_residual: Max-norm of the free-entry gradient at the returned iterate,
            relative to ``Tr(G) / T``.
        converged: Whether ``kkt_residual <= tol`` was reached.
        trace: Objective at every accepted iterate, starting from ``X = I``.
    """

    objective_value: float
    iterations: int
    kkt_residual: float
    converged: bool
    trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document form of the report."""
        return asdict(self)
