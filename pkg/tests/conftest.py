"""Shared fixtures and independent oracles for the curvmix test suite."""

from __future__ import annotations

import itertools
from typing import TYPE_CHECKING

import numpy as np
import pytest
import structlog
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from curvmix.mixopt import BandedGram, MixingMatrix
from curvmix.noisegen import raw_draw

if TYPE_CHECKING:
    from collections.abc import Iterator

    from numpy.typing import NDArray


@pytest.fixture(autouse=True)
def _reset_structlog() -> Iterator[None]:
    """Undo logging configuration done by CLI tests."""
    yield
    structlog.reset_defaults()
    structlog.contextvars.clear_contextvars()


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator for building test inputs."""
    return np.random.default_rng(20240601)


def explicit_curvature_workload(
    mu: NDArray[np.float64],
    eta: float,
    T: int,  # noqa: N803
) -> NDArray[np.float64]:
    """``V^T M V`` with ``V[i, j] = (1 - eta mu_i)^(T - j - 1)`` built entry by entry."""
    mu = np.asarray(mu, dtype=np.float64)
    v = np.empty((mu.size, T))
    for i, value in enumerate(mu):
        for j in range(T):
            v[i, j] = (1.0 - eta * value) ** (T - j - 1)
    return v.T @ np.diag(mu) @ v


def random_psd(p: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Random symmetric positive semi-definite matrix."""
    a = rng.standard_normal((p, p))
    return a @ a.T / p


def random_mixing(T: int, band: int, rng: np.random.Generator) -> MixingMatrix:  # noqa: N803
    """Random lower-banded mixing matrix with positive diagonal and unit columns."""
    c = np.tril(rng.standard_normal((T, T)))
    index = np.arange(T)
    c[np.subtract.outer(index, index) >= band] = 0.0
    c[index, index] = np.abs(c[index, index]) + 0.5
    c /= np.linalg.norm(c, axis=0)
    return MixingMatrix(entries=c, band=band)


def random_feasible_gram(T: int, band: int, rng: np.random.Generator) -> BandedGram:  # noqa: N803
    """Random positive-definite ``b``-banded gram matrix with unit diagonal."""
    x = random_mixing(T, band, rng).gram()
    np.fill_diagonal(x, 1.0)
    return BandedGram(entries=0.5 * (x + x.T), band=band)


def replay_raw(seed: int, T: int, p: int) -> NDArray[np.float64]:  # noqa: N803
    """The raw Gaussian inputs of a stream, one row per step."""
    return np.vstack([raw_draw(seed, t, p) for t in range(T)])


def materialized_noise(c: MixingMatrix, seed: int, p: int) -> NDArray[np.float64]:
    """Dense ``C^-1 Z`` for the raw draws of ``seed``: the whole stream at once."""
    z = replay_raw(seed, c.T, p)
    return solve_triangular(c.entries, z, lower=True)


def grid_minimum_2x2(g: NDArray[np.float64], points: int = 20001) -> tuple[float, float]:
    """Brute-force ``min Tr(X^-1 G)`` over ``X = [[1, x], [x, 1]]`` on a grid.

    Returns:
        ``(x_best, objective_best)``.
    """
    x = np.linspace(-0.999, 0.999, points)
    det = 1.0 - x**2
    values = (g[0, 0] + g[1, 1] - 2.0 * x * g[0, 1]) / det
    best = int(np.argmin(values))
    return float(x[best]), float(values[best])


def correlation_factors(angles: NDArray[np.float64], T: int) -> NDArray[np.float64]:  # noqa: N803
    """Lower-triangular factors with unit-norm rows, one per row of ``angles``.

    Row ``i`` of each factor is the point on the unit sphere with spherical angles
    ``angles[:, i(i-1)/2 : i(i+1)/2]``, so ``L L^T`` is a unit-diagonal PSD matrix and
    every such matrix is reached with angles in ``(0, pi)``.
    """
    n = angles.shape[0]
    factors = np.zeros((n, T, T))
    factors[:, 0, 0] = 1.0
    start = 0
    for i in range(1, T):
        sin_prod = np.ones(n)
        for j in range(i):
            factors[:, i, j] = sin_prod * np.cos(angles[:, start + j])
            sin_prod = sin_prod * np.sin(angles[:, start + j])
        factors[:, i, i] = sin_prod
        start += i
    return factors


def full_band_minimum(g: NDArray[np.float64], grid_points: int = 7) -> float:
    """``min Tr(X^-1 G)`` over unit-diagonal PD ``X`` by grid search and refinement.

    A coarse grid over the angles of :func:`correlation_factors` picks a start point and
    Nelder-Mead refines it.

    Returns:
        Best objective value found.
    """
    T = g.shape[0]  # noqa: N806
    count = T * (T - 1) // 2

    def values(angles: NDArray[np.float64]) -> NDArray[np.float64]:
        factors = correlation_factors(angles, T)
        pivots = np.abs(np.diagonal(factors, axis1=1, axis2=2)).min(axis=1)
        out = np.full(angles.shape[0], np.inf)
        usable = pivots > 1e-8
        x = factors[usable] @ np.transpose(factors[usable], (0, 2, 1))
        out[usable] = np.trace(np.linalg.solve(x, np.broadcast_to(g, x.shape)), axis1=1, axis2=2)
        return out

    axis = np.linspace(0.0, np.pi, grid_points + 2)[1:-1]
    grid = np.array(list(itertools.product(axis, repeat=count)))
    coarse = values(grid)
    start = grid[int(np.argmin(coarse))]
    refined = minimize(
        lambda a: float(values(a[None, :])[0]),
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 200_000, "maxfev": 200_000},
    )
    return float(min(refined.fun, coarse.min()))
