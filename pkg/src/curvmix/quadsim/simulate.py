"""Monte-Carlo simulation of noisy descent on quadratic problems."""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd

from curvmix.errors import ArgumentError, IdentityCheckError
from curvmix.mixopt import SolverOptions, factor, solve_mixing
from curvmix.noisegen import NoiseStream
from curvmix.utils.logging import get_logger
from curvmix.utils.seeds import derive_generator
from curvmix.workload import curvature_workload, identity_workload, prefix_workload

from .problem import QuadProblem, closed_form_excess, noise_free_descent

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.mixopt import MixingMatrix
    from curvmix.workload import WorkloadKind, WorkloadMatrix

logger = get_logger(__name__)

IDENTITY_TOLERANCE = 1e-8
ROUNDOFF_FACTOR = 16
CHUNK_COORDINATES = 1 << 16


@dataclass(frozen=True)
class SimulationResult:
    """Monte-Carlo estimate of the expected excess loss.

    Attributes:
        mean: Sample mean of ``L(w_hat_T) - L(w_T)``.
        std_error: Standard error of the mean.
        trials: Number of simulated trajectories.
        max_identity_error: Worst relative error of the pathwise error identity.
    """

    mean: float
    std_error: float
    trials: int
    max_identity_error: float = 0.0

    def to_dict(
        self,
        *,
        closed_form: float,
        seed: int,
        params: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        """Return the JSON simulation report."""
        return {
            "closed_form": closed_form,
            "mc_mean": self.mean,
            "mc_std_error": self.std_error,
            "trials": self.trials,
            "seed": seed,
            "max_identity_error": self.max_identity_error,
            "params": dict(params or {}),
        }


def _chunk_seed(seed: int, chunk: int) -> int:
    return int(derive_generator(seed, "trials", chunk).integers(2**63))


def identity_errors(
    delta: NDArray[np.float64],
    predicted: NDArray[np.float64],
    reference: NDArray[np.float64],
    steps: int,
) -> NDArray[np.float64]:
    """Per-row relative error of ``delta`` against its predicted value.

    The residual is measured relative to ``||predicted||`` after discounting the
    rounding error of forming ``delta`` as a difference of iterates of size
    ``reference`` over ``steps`` updates.

    Args:
        delta: Simulated ``w_hat_T - w_T`` per row.
        predicted: Closed-form ``-eta sum_j (I - eta H)^j z~_{T-j-1}`` per row.
        reference: Per-row magnitude of the iterates.
        steps: Number of descent steps.

    Returns:
        Relative errors, zero where the residual is within rounding.
    """
    roundoff = ROUNDOFF_FACTOR * steps * np.finfo(np.float64).eps * reference
    residual = np.maximum(np.linalg.norm(delta - predicted, axis=1) - roundoff, 0.0)
    scale = np.maximum(np.linalg.norm(predicted, axis=1), np.finfo(np.float64).tiny)
    return residual / scale


def _run_chunk(
    q: QuadProblem,
    mixing: MixingMatrix,
    noise_scale: float,
    target: NDArray[np.float64],
    size: int,
    seed: int,
) -> tuple[NDArray[np.float64], float]:
    """Simulate ``size`` trajectories that share one stream of dimension ``p * size``.

    Returns:
        Per-trajectory excess losses and the worst identity error in the chunk.
    """
    stream = NoiseStream(mixing, q.p * size, seed=seed, scale=noise_scale)
    contraction = np.eye(q.p) - q.eta * q.H
    noisy = np.tile(q.w0, (size, 1))
    predicted = np.zeros((size, q.p))
    for _ in range(q.T):
        noise = stream.next().reshape(size, q.p)
        noisy = noisy - q.eta * ((noisy - q.d) @ q.H + noise)
        # Horner form of -eta * sum_j (I - eta H)^j z~_{T-j-1}
        predicted = predicted @ contraction - q.eta * noise

    delta = noisy - target
    reference = (
        1.0
        + np.linalg.norm(q.w0)
        + np.linalg.norm(q.d)
        + np.linalg.norm(target)
        + np.linalg.norm(noisy, axis=1)
    )
    worst = float(identity_errors(delta, predicted, reference, q.T).max(initial=0.0))

    # L(w + delta) - L(w) expanded around the noise-free endpoint
    quadratic = 0.5 * np.einsum("ni,ij,nj->n", delta, q.H, delta)
    excess = quadratic + delta @ (q.H @ (target - q.d))
    return excess, worst


def simulate_excess(
    q: QuadProblem,
    C: MixingMatrix,  # noqa: N803
    noise_scale: float,
    trials: int,
    seed: int,
    threads: int = 1,
) -> SimulationResult:
    """Estimate ``E[L(w_hat_T)] - L(w_T)`` by simulating noisy descent.

    Trials are simulated in chunks; each chunk draws its noise from one stream whose
    coordinates are the stacked parameters of its trajectories. The chunk layout
    depends only on ``trials`` and ``p``, so runs with the same seed share their raw
    Gaussian draws across different ``C`` and across thread counts.

    Args:
        q: Quadratic problem.
        C: Mixing matrix with ``T`` rows.
        noise_scale: Multiplier of the unit-variance correlated noise.
        trials: Number of trajectories, at least 2.
        seed: Base seed.
        threads: Worker threads over chunks.

    Returns:
        Mean, standard error and the worst pathwise identity error.

    Raises:
        IdentityCheckError: When a trajectory violates the pathwise error identity.
    """
    if trials < 2:
        message = f"trials must be at least 2, got {trials}"
        raise ArgumentError(message)
    if C.T != q.T:
        message = f"mixing matrix has {C.T} rows but the problem runs T={q.T} steps"
        raise ArgumentError(message)
    if noise_scale == 0:
        return SimulationResult(mean=0.0, std_error=0.0, trials=trials)

    trajectory, _ = noise_free_descent(q)
    target = trajectory[-1]
    per_chunk = max(1, CHUNK_COORDINATES // q.p)
    sizes = [min(per_chunk, trials - start) for start in range(0, trials, per_chunk)]

    def run(item: tuple[int, int]) -> tuple[NDArray[np.float64], float]:
        index, size = item
        return _run_chunk(q, C, noise_scale, target, size, _chunk_seed(seed, index))

    if threads <= 1 or len(sizes) == 1:
        outcomes = [run(item) for item in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, enumerate(sizes)))

    excess = np.concatenate([chunk for chunk, _ in outcomes])
    worst = max(error for _, error in outcomes)
    if worst > IDENTITY_TOLERANCE:
        message = f"pathwise error identity violated, relative error {worst:.3g}"
        raise IdentityCheckError(message)

    mean = float(np.mean(excess))
    std_error = float(np.std(excess, ddof=1) / np.sqrt(trials))
    logger.info(
        "simulation-finished",
        trials=trials,
        mean=mean,
        std_error=std_error,
        identity_error=worst,
    )
    return SimulationResult(
        mean=mean,
        std_error=std_error,
        trials=trials,
        max_identity_error=worst,
    )


def _design_workload(kind: WorkloadKind, q: QuadProblem) -> WorkloadMatrix:
    if kind == "curvature":
        return curvature_workload(q.spectrum(), q.eta, q.T)
    if kind == "identity":
        return identity_workload(q.T)
    return prefix_workload(q.T)


def band_sweep(
    q: QuadProblem,
    bands: Sequence[int],
    *,
    noise_scale: float,
    trials: int,
    seed: int,
    kinds: Sequence[WorkloadKind] = ("curvature", "identity"),
    opts: SolverOptions | None = None,
    threads: int = 1,
) -> pd.DataFrame:
    """Closed-form and simulated excess loss for every band size and design workload.

    For each ``(kind, band)`` the mixing matrix is optimized for the ``kind`` workload
    and then scored against the true curvature of ``q``. All rows use the same seed.

    Returns:
        Frame with columns ``band, workload, objective, closed_form, mc_mean,
        mc_std_error``.
    """
    spectrum = q.spectrum()
    rows: list[dict[str, Any]] = []
    for kind in kinds:
        design = _design_workload(kind, q)
        for band in bands:
            gram, report = solve_mixing(design, band, opts)
            mixing = factor(gram)
            closed = closed_form_excess(spectrum, q.eta, q.T, gram, noise_scale)
            result = simulate_excess(q, mixing, noise_scale, trials, seed, threads)
            rows.append(
                {
                    "band": band,
                    "workload": kind,
                    "objective": report.objective_value,
                    "closed_form": closed,
                    "mc_mean": result.mean,
                    "mc_std_error": result.std_error,
                }
            )
            logger.debug("sweep-point", band=band, workload=kind, closed_form=closed)
    return pd.DataFrame(
        rows,
        columns=["band", "workload", "objective", "closed_form", "mc_mean", "mc_std_error"],
    )
