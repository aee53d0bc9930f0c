"""Projected limited-memory quasi-Newton solver for the banded mixing problem."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from curvmix.errors import ArgumentError, NotPositiveDefiniteError
from curvmix.utils.logging import get_logger

from .problem import cholesky_lower, sandwich
from .types import BandedGram, SolveReport, free_indices

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.workload import WorkloadMatrix

logger = get_logger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and limits for :func:`solve_mixing`.

    Attributes:
        tol: Stop once the free-entry gradient max-norm, divided by the workload scale
            ``Tr(G) / T``, is at most this.
        max_iters: Limit on accepted steps.
        memory: Number of stored curvature pairs.
        min_pivot: Smallest accepted Cholesky pivot of a trial iterate.
        armijo: Sufficient-decrease constant of the backtracking search.
        max_halvings: Backtracking limit per step.
    """

    tol: float = 1e-7
    max_iters: int = 10_000
    memory: int = 10
    min_pivot: float = 1e-12
    armijo: float = 1e-4
    max_halvings: int = 60


class _FreeProblem:
    """Objective over the free upper-triangle entries of a banded unit-diagonal ``X``."""

    def __init__(self, g: NDArray[np.float64], band: int, min_pivot: float) -> None:
        self.g = g
        self.T = g.shape[0]
        self.band = band
        self.min_pivot = min_pivot
        self.rows, self.cols = free_indices(self.T, band)

    def assemble(self, free: NDArray[np.float64]) -> NDArray[np.float64]:
        x = np.eye(self.T)
        x[self.rows, self.cols] = free
        x[self.cols, self.rows] = free
        return x

    def evaluate(self, free: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
        """Objective and gradient with respect to the free vector.

        Raises:
            NotPositiveDefiniteError: When the assembled ``X`` is not safely PD.
        """
        lower = cholesky_lower(self.assemble(free), self.min_pivot)
        value, both = sandwich(lower, self.g)
        # each free value sits at [i, j] and [j, i]
        return value, -2.0 * both[self.rows, self.cols]


def _two_loop(
    grad: NDArray[np.float64],
    pairs: deque[tuple[NDArray[np.float64], NDArray[np.float64], float]],
) -> NDArray[np.float64]:
    """L-BFGS two-loop recursion returning the quasi-Newton direction ``-H grad``."""
    q = grad.copy()
    coeffs: list[float] = []
    for s, y, rho in reversed(pairs):
        a = rho * float(s @ q)
        coeffs.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y, rho), a in zip(pairs, reversed(coeffs)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def solve_mixing(
    g: WorkloadMatrix,
    b: int,
    opts: SolverOptions | None = None,
) -> tuple[BandedGram, SolveReport]:
    """Minimize ``Tr(X^-1 G)`` over positive-definite ``b``-banded ``X`` with unit diagonal.

    The free variables are the in-band upper off-diagonal entries, so the diagonal
    and band constraints hold by construction and projection is the identity. A
    backtracking line search rejects every trial point whose Cholesky factorization
    fails or has a pivot below ``opts.min_pivot``. The search starts from ``X = I``.

    Args:
        g: Symmetric PSD workload.
        b: Band size, ``1 <= b <= T``.
        opts: Solver tolerances; defaults to :class:`SolverOptions`.

    Returns:
        The best feasible iterate and its report. ``converged`` is false when
        ``opts.max_iters`` ran out or the line search stalled above tolerance.
    """
    opts = opts or SolverOptions()
    T = g.T  # noqa: N806
    if not 1 <= b <= T:
        message = f"band b={b} must satisfy 1 <= b <= T={T}"
        raise ArgumentError(message)

    problem = _FreeProblem(g.entries, b, opts.min_pivot)
    free = np.zeros(problem.rows.size)
    value, grad = problem.evaluate(free)
    trace = [value]
    pairs: deque[tuple[NDArray[np.float64], NDArray[np.float64], float]] = deque(
        maxlen=opts.memory
    )
    # residuals are relative to the mean diagonal of G
    scale = float(np.trace(g.entries)) / T
    if not scale > 0:
        scale = 1.0
    kkt = 0.5 * float(np.max(np.abs(grad))) / scale if grad.size else 0.0
    iterations = 0

    while kkt > opts.tol and iterations < opts.max_iters:
        direction = _two_loop(grad, pairs)
        slope = float(grad @ direction)
        if not slope < 0:
            pairs.clear()
            direction = -grad
            slope = float(grad @ direction)
        # entries of a PD unit-diagonal matrix stay inside (-1, 1)
        step = min(1.0, 1.0 / float(np.max(np.abs(direction))))

        accepted = None
        for _ in range(opts.max_halvings):
            trial = free + step * direction
            try:
                trial_value, trial_grad = problem.evaluate(trial)
            except NotPositiveDefiniteError:
                step *= 0.5
                continue
            if trial_value <= value + opts.armijo * step * slope:
                accepted = (trial, trial_value, trial_grad)
                break
            step *= 0.5

        if accepted is None:
            if pairs:
                logger.debug("solve-reset-memory", iteration=iterations)
                pairs.clear()
                continue
            logger.warning("solve-line-search-stalled", iteration=iterations, kkt=kkt)
            break

        trial, trial_value, trial_grad = accepted
        s = trial - free
        y = trial_grad - grad
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            pairs.append((s, y, 1.0 / sy))
        free, value, grad = trial, trial_value, trial_grad
        trace.append(value)
        kkt = 0.5 * float(np.max(np.abs(grad))) / scale
        iterations += 1

    converged = kkt <= opts.tol
    report = SolveReport(
        objective_value=value,
        iterations=iterations,
        kkt_residual=kkt,
        converged=converged,
        trace=trace,
    )
    if converged:
        logger.info("solve-converged", T=T, band=b, iterations=iterations, objective=value)
    else:
        logger.warning("solve-not-converged", T=T, band=b, iterations=iterations, kkt=kkt)
    return BandedGram(entries=problem.assemble(free), band=b), report
