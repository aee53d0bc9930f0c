"""Domain types for Hessian eigenspectra and their post-processing."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

import numpy as np

from curvmix.errors import ArgumentError

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import ArrayLike, NDArray


@dataclass(frozen=True)
class SymmetricOperator:
    """Matrix-free symmetric linear map on ``R^dim``."""

    dim: int
    apply: Callable[[NDArray[np.float64]], NDArray[np.float64]]

    def __post_init__(self) -> None:
        if self.dim < 1:
            message = f"operator dimension must be positive, got {self.dim}"
            raise ArgumentError(message)

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> SymmetricOperator:
        """Wrap a dense symmetric matrix.

        Args:
            matrix: Square symmetric array.

        Returns:
            Operator applying ``matrix @ v``.
        """
        dense = np.asarray(matrix, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            message = f"expected a square matrix, got shape {dense.shape}"
            raise ArgumentError(message)
        return cls(dim=dense.shape[0], apply=lambda v: dense @ v)

    @classmethod
    def diagonal(cls, entries: ArrayLike) -> SymmetricOperator:
        """Wrap a diagonal matrix given by its entries."""
        diag = np.asarray(entries, dtype=np.float64).ravel()
        return cls(dim=diag.size, apply=lambda v: diag * v)


def check_symmetry(op: SymmetricOperator, trials: int = 8, seed: int = 0) -> float:
    """Sample the symmetry defect of ``op`` on random unit vectors.

    Args:
        op: Operator under test.
        trials: Number of random ``(u, v)`` pairs.
        seed: Seed for the sampled vectors.

    Returns:
        Largest observed ``|u.(Av) - v.(Au)| / (|Au| |v|)``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(op.dim)
        v = rng.standard_normal(op.dim)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        au = op.apply(u)
        av = op.apply(v)
        scale = float(np.linalg.norm(au) * np.linalg.norm(v))
        if scale == 0.0:
            continue
        worst = max(worst, abs(float(u @ av - v @ au)) / scale)
    return worst


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues sorted non-increasing, possibly only the leading part.

    Attributes:
        values: Eigenvalues, largest first.
        total_dim: Dimension ``p`` of the operator the values belong to.
        k_measured: Count of leading entries that were measured directly.
        source: Free-form provenance string.
        converged: False when an iterative estimate stopped early.
    """

    values: NDArray[np.float64]
    total_dim: int
    k_measured: int
    source: str = ""
    converged: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).ravel()
        object.__setattr__(self, "values", values)
        if values.size > self.total_dim:
            message = (
                f"spectrum has {values.size} values but total_dim={self.total_dim}"
            )
            raise ArgumentError(message)
        if not 0 <= self.k_measured <= values.size:
            message = (
                f"k_measured={self.k_measured} outside [0, {values.size}]"
            )
            raise ArgumentError(message)
        if not np.all(np.isfinite(values)):
            message = "spectrum values must be finite"
            raise ArgumentError(message)
        if values.size > 1 and np.any(np.diff(values) > 0):
            message = "spectrum values must be sorted non-increasing"
            raise ArgumentError(message)

    @classmethod
    def from_values(
        cls,
        values: ArrayLike,
        *,
        total_dim: int | None = None,
        source: str = "",
    ) -> EigenSpectrum:
        """Build a fully measured spectrum from unsorted values."""
        ordered = np.sort(np.asarray(values, dtype=np.float64).ravel())[::-1]
        dim = ordered.size if total_dim is None else total_dim
        return cls(values=ordered, total_dim=dim, k_measured=ordered.size, source=source)

    @property
    def measured(self) -> NDArray[np.float64]:
        """Directly measured leading values."""
        return self.values[: self.k_measured]

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document form of the spectrum."""
        return {
            "total_dim": self.total_dim,
            "k_measured": self.k_measured,
            "values": self.values.tolist(),
            "source": self.source,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EigenSpectrum:
        """Parse the JSON document form of a spectrum."""
        return cls(
            values=np.asarray(data["values"], dtype=np.float64),
            total_dim=int(data["total_dim"]),
            k_measured=int(data["k_measured"]),
            source=str(data.get("source", "")),
            converged=bool(data.get("converged", True)),
        )


@dataclass(frozen=True)
class TailFit:
    """Anchored power-law tail ``log mu_i = C (log p+ - log i)^alpha + log mu_p+``."""

    coeff_C: float  # noqa: N815 - matches the file format field name
    alpha: float
    p_plus: int
    mu_pplus: float
    k_used: int

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            message = f"alpha must be positive, got {self.alpha}"
            raise ArgumentError(message)
        if self.p_plus < 1 or self.mu_pplus <= 0:
            message = "p_plus must be positive and mu_pplus strictly positive"
            raise ArgumentError(message)

    def evaluate(self, indices: ArrayLike) -> NDArray[np.float64]:
        """Evaluate the curve at 1-based ``indices`` in ``[1, p_plus]``."""
        i = np.asarray(indices, dtype=np.float64)
        gap = np.log(self.p_plus) - np.log(i)
        log_mu = self.coeff_C * np.power(gap, self.alpha) + np.log(self.mu_pplus)
        return np.exp(log_mu)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document form of the fit."""
        return {
            "coeff_C": self.coeff_C,
            "alpha": self.alpha,
            "p_plus": self.p_plus,
            "mu_pplus": self.mu_pplus,
            "k_used": self.k_used,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TailFit:
        """Parse the JSON document form of a fit."""
        return cls(
            coeff_C=float(data["coeff_C"]),
            alpha=float(data["alpha"]),
            p_plus=int(data["p_plus"]),
            mu_pplus=float(data["mu_pplus"]),
            k_used=int(data["k_used"]),
        )


def truncate_negative(s: EigenSpectrum) -> EigenSpectrum:
    """Replace negative eigenvalues by zero.

    Args:
        s: Input spectrum.

    Returns:
        Spectrum with ``max(value, 0)`` entries, same ordering and dimension.
    """
    return replace(s, values=np.maximum(s.values, 0.0))


def top_k(s: EigenSpectrum, k: int) -> EigenSpectrum:
    """Keep only the ``k`` largest values of ``s`` as the measured prefix."""
    if not 0 <= k <= s.values.size:
        message = f"k={k} outside [0, {s.values.size}]"
        raise ArgumentError(message)
    return EigenSpectrum(
        values=s.values[:k].copy(),
        total_dim=s.total_dim,
        k_measured=min(k, s.k_measured),
        source=f"top{k}:{s.source}",
    )


def merge_spectra(a: EigenSpectrum, b: EigenSpectrum) -> EigenSpectrum:
    """Concatenate two spectra into the spectrum of their direct sum."""
    return EigenSpectrum.from_values(
        np.concatenate([a.values, b.values]),
        total_dim=a.total_dim + b.total_dim,
        source=f"merge({a.source},{b.source})",
    )
