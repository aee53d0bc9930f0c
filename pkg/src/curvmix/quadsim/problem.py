"""Quadratic test problems and the closed-form excess loss of correlated-noise descent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from curvmix.errors import ArgumentError
from curvmix.mixopt import objective
from curvmix.spectrum import EigenSpectrum
from curvmix.workload import curvature_workload

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.mixopt import BandedGram


@dataclass(frozen=True)
class QuadProblem:
    """Quadratic loss ``L(w) = 1/2 (w - d)^T H (w - d)`` with a fixed descent schedule.

    ``hess`` may be an explicit PSD matrix or an :class:`EigenSpectrum`; a spectrum is
    materialized as ``Diag(values)`` padded with zeros up to its ``total_dim``.
    """

    hess: NDArray[np.float64] | EigenSpectrum
    d: NDArray[np.float64]
    w0: NDArray[np.float64]
    eta: float
    T: int  # noqa: N815

    def __post_init__(self) -> None:
        if isinstance(self.hess, EigenSpectrum):
            diag = np.zeros(self.hess.total_dim)
            diag[: self.hess.values.size] = self.hess.values
            if np.any(diag < 0):
                message = "spectrum of a quadratic problem must be non-negative"
                raise ArgumentError(message)
            matrix = np.diag(diag)
        else:
            matrix = np.asarray(self.hess, dtype=np.float64)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                message = f"hessian must be square, got shape {matrix.shape}"
                raise ArgumentError(message)
            scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
            if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * scale):
                message = "hessian must be symmetric"
                raise ArgumentError(message)
            lowest = float(np.linalg.eigvalsh(matrix)[0]) if matrix.size else 0.0
            if lowest < -1e-10 * scale:
                message = f"hessian is not PSD, smallest eigenvalue {lowest:.3g}"
                raise ArgumentError(message)
        object.__setattr__(self, "hess", matrix)

        p = matrix.shape[0]
        for name in ("d", "w0"):
            vector = np.asarray(getattr(self, name), dtype=np.float64).ravel()
            if vector.shape != (p,):
                message = f"{name} must have length {p}, got {vector.size}"
                raise ArgumentError(message)
            object.__setattr__(self, name, vector)
        if self.eta <= 0:
            message = f"eta must be positive, got {self.eta}"
            raise ArgumentError(message)
        if self.T < 1:
            message = f"T must be at least 1, got {self.T}"
            raise ArgumentError(message)

    @property
    def H(self) -> NDArray[np.float64]:  # noqa: N802
        """Dense Hessian."""
        matrix: NDArray[np.float64] = self.hess  # type: ignore[assignment]
        return matrix

    @property
    def p(self) -> int:
        """Parameter dimension."""
        return int(self.H.shape[0])

    def loss(self, w: NDArray[np.float64]) -> NDArray[np.float64]:
        """Loss of one point or of a ``(..., p)`` batch of points."""
        diff = w - self.d
        return 0.5 * np.einsum("...i,ij,...j->...", diff, self.H, diff)

    def spectrum(self) -> EigenSpectrum:
        """Eigenvalues of ``H`` with tiny negative roundoff clipped to zero."""
        values = np.clip(np.linalg.eigvalsh(self.H), 0.0, None)
        return EigenSpectrum.from_values(values, source="quadratic-hessian")


def noise_free_descent(q: QuadProblem) -> tuple[NDArray[np.float64], float]:
    """Full-gradient descent ``w_i = w_{i-1} - eta H (w_{i-1} - d)`` from ``w0``.

    Returns:
        ``(trajectory, final_loss)`` with the trajectory stacked as ``(T + 1) x p``.
    """
    trajectory = np.empty((q.T + 1, q.p))
    trajectory[0] = q.w0
    for i in range(1, q.T + 1):
        prev = trajectory[i - 1]
        trajectory[i] = prev - q.eta * (q.H @ (prev - q.d))
    return trajectory, float(q.loss(trajectory[-1]))


def closed_form_excess(
    s: EigenSpectrum,
    eta: float,
    T: int,  # noqa: N803
    X: BandedGram,  # noqa: N803
    noise_scale: float = 1.0,
) -> float:
    """Expected excess loss ``noise_scale^2 (eta^2 / 2) Tr(X^-1 V^T M V)`` of noisy descent.

    Args:
        s: Non-negative Hessian spectrum.
        eta: Learning rate.
        T: Iteration count.
        X: Gram matrix of the mixing matrix driving the noise.
        noise_scale: Standard deviation multiplier of the injected noise.

    Returns:
        Expected ``L(w_hat_T) - L(w_T)``.
    """
    workload = curvature_workload(s, eta, T)
    return noise_scale**2 * 0.5 * eta**2 * objective(X, workload)
