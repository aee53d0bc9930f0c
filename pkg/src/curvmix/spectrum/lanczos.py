"""Leading-eigenvalue estimation: Lanczos iteration and a dense reference solver."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh

from curvmix.errors import ArgumentError, SpectrumSizeError
from curvmix.utils.logging import get_logger
from curvmix.utils.seeds import derive_generator

from .types import EigenSpectrum, SymmetricOperator

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = get_logger(__name__)

DENSE_CAP = 4096
_RESTART_FLOOR = 1e-8


def _orthogonalize(w: NDArray[np.float64], basis: NDArray[np.float64]) -> None:
    """Remove the ``basis`` components of ``w`` in place (two Gram-Schmidt passes)."""
    for _ in range(2):
        w -= basis @ (basis.T @ w)


def _ritz(
    alphas: NDArray[np.float64],
    betas: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Ritz values (descending) and last components of their eigenvectors."""
    if alphas.size == 1:
        return alphas.copy(), np.ones(1)
    theta, vecs = eigh_tridiagonal(alphas, betas)
    order = np.argsort(theta)[::-1]
    return theta[order], vecs[-1, order]


def lanczos_topk(
    op: SymmetricOperator,
    k: int,
    max_iters: int | None = None,
    seed: int = 0,
    *,
    tol: float = 1e-10,
) -> EigenSpectrum:
    """Estimate the ``k`` algebraically largest eigenvalues of ``op``.

    Runs Lanczos with full reorthogonalization from a seeded random start vector. After
    a breakdown (an invariant subspace was found) the basis is extended with a fresh
    random vector orthogonal to it, so repeated eigenvalues are recovered.

    Args:
        op: Symmetric operator.
        k: Number of eigenvalues wanted, ``1 <= k <= op.dim``.
        max_iters: Krylov basis size limit, at least ``k``. Defaults to
            ``min(dim, max(3k, 300))``.
        seed: Seed of the start vector.
        tol: Relative residual bound ``|beta_m s_i| <= tol |theta_i|`` for convergence.

    Returns:
        Partial spectrum with ``k_measured == len(values)``; ``converged`` is false when
        ``max_iters`` ran out before the leading Ritz values settled.
    """
    if not 1 <= k <= op.dim:
        message = f"k={k} must satisfy 1 <= k <= dim={op.dim}"
        raise ArgumentError(message)
    if max_iters is None:
        max_iters = min(op.dim, max(3 * k, 300))
    if max_iters < k:
        message = f"max_iters={max_iters} must be at least k={k}"
        raise ArgumentError(message)
    m = min(max_iters, op.dim)

    rng = derive_generator(seed, "lanczos")
    basis = np.zeros((op.dim, m))
    alphas = np.zeros(m)
    betas = np.zeros(m)
    q = rng.standard_normal(op.dim)
    basis[:, 0] = q / np.linalg.norm(q)
    scale = 0.0
    steps = 0
    converged = False
    exhausted = False

    for j in range(m):
        steps = j + 1
        w = np.asarray(op.apply(basis[:, j]), dtype=np.float64).copy()
        alphas[j] = basis[:, j] @ w
        w -= alphas[j] * basis[:, j]
        if j > 0:
            w -= betas[j - 1] * basis[:, j - 1]
        _orthogonalize(w, basis[:, : j + 1])
        beta = float(np.linalg.norm(w))
        scale = max(scale, abs(alphas[j]), beta)
        breakdown = beta <= 1e-12 * max(scale, 1.0)

        if not breakdown and steps >= k:
            theta, last = _ritz(alphas[:steps], betas[: steps - 1])
            residual = np.abs(beta * last[:k])
            floor = tol * np.maximum(np.abs(theta[:k]), scale * 1e-3)
            if np.all(residual <= floor):
                converged = True
                break
        if steps == m:
            break

        if breakdown:
            # invariant subspace: restart orthogonally to the current basis, since
            # copies of repeated eigenvalues are invisible to a single Krylov space
            logger.debug("lanczos-breakdown", step=steps)
            fresh = rng.standard_normal(op.dim)
            norm0 = float(np.linalg.norm(fresh))
            _orthogonalize(fresh, basis[:, :steps])
            norm1 = float(np.linalg.norm(fresh))
            if norm1 <= _RESTART_FLOOR * norm0:
                exhausted = True
                break
            betas[j] = 0.0
            basis[:, j + 1] = fresh / norm1
            continue
        betas[j] = beta
        basis[:, j + 1] = w / beta

    theta, _ = _ritz(alphas[:steps], betas[: steps - 1])
    if exhausted or steps == op.dim:
        # the basis spans the whole space: Ritz values are the exact spectrum
        converged = True
    values = theta[: min(k, steps)]
    if not converged:
        logger.warning(
            "lanczos-not-converged",
            k=k,
            iterations=steps,
            max_iters=max_iters,
        )
    return EigenSpectrum(
        values=values,
        total_dim=op.dim,
        k_measured=values.size,
        source=f"lanczos(k={k},iters={steps},seed={seed})",
        converged=converged,
    )


def dense_eigs(matrix: ArrayLike, cap: int = DENSE_CAP) -> EigenSpectrum:
    """Full spectrum of a dense symmetric matrix via a direct eigensolver.

    Args:
        matrix: Symmetric ``p x p`` array.
        cap: Largest accepted ``p``.

    Returns:
        Complete spectrum sorted non-increasing.
    """
    dense = np.asarray(matrix, dtype=np.float64)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        message = f"expected a square matrix, got shape {dense.shape}"
        raise ArgumentError(message)
    p = dense.shape[0]
    if p > cap:
        message = f"dense eigensolve of size {p} exceeds cap {cap}"
        raise SpectrumSizeError(message)
    if not np.allclose(dense, dense.T, rtol=1e-10, atol=1e-12):
        message = "dense_eigs requires a symmetric matrix"
        raise ArgumentError(message)
    values = eigvalsh(0.5 * (dense + dense.T))[::-1]
    return EigenSpectrum(values=values.copy(), total_dim=p, k_measured=p, source="dense")
