"""Differentially private SGD with per-example clipping and correlated noise."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd

from curvmix.errors import ArgumentError, TrainingDivergedError
from curvmix.noisegen import NoiseStream
from curvmix.utils.logging import get_logger
from curvmix.utils.seeds import derive_generator

from .models import ModelParams, per_example_gradients, per_example_losses
from .schedule import partition_schedule

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.mixopt import MixingMatrix

    from .data import Dataset, ModelKind

logger = get_logger(__name__)

LOG_COLUMNS = ["step", "batch_loss", "grad_norm_mean", "clipped_fraction"]


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one private training run.

    Attributes:
        T: Number of steps.
        b: Band size of the mixing matrix and number of data partitions.
        batch: Records per batch.
        clip: Per-example clipping norm.
        sigma: Noise multiplier; 0 disables noise.
        eta: Learning rate.
        seed: Seed of the schedule and the noise.
        model_kind: ``"linear"`` or ``"logistic"``.
    """

    T: int  # noqa: N815
    b: int
    batch: int
    clip: float
    sigma: float
    eta: float
    seed: int = 0
    model_kind: ModelKind = "logistic"

    def __post_init__(self) -> None:
        if not 1 <= self.b <= self.T:
            message = f"band b={self.b} must satisfy 1 <= b <= T={self.T}"
            raise ArgumentError(message)
        if self.batch < 1:
            message = f"batch must be at least 1, got {self.batch}"
            raise ArgumentError(message)
        if self.clip <= 0:
            message = f"clip norm must be positive, got {self.clip}"
            raise ArgumentError(message)
        if self.sigma < 0:
            message = f"sigma must be non-negative, got {self.sigma}"
            raise ArgumentError(message)
        if self.eta <= 0:
            message = f"eta must be positive, got {self.eta}"
            raise ArgumentError(message)
        if self.model_kind not in ("linear", "logistic"):
            message = f"unknown model kind {self.model_kind!r}"
            raise ArgumentError(message)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document form."""
        return asdict(self)


def clip_gradient(g: NDArray[np.float64], zeta: float) -> NDArray[np.float64]:
    """Scale ``g`` by ``min(1, zeta / ||g||)``."""
    if zeta <= 0:
        message = f"clip norm must be positive, got {zeta}"
        raise ArgumentError(message)
    norm = float(np.linalg.norm(g))
    if norm <= zeta:
        return g.copy()
    return g * (zeta / norm)


def _clip_rows(
    grads: NDArray[np.float64],
    zeta: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
    norms = np.linalg.norm(grads, axis=1)
    clipped = norms > zeta
    factors = np.ones_like(norms)
    factors[clipped] = zeta / norms[clipped]
    return grads * factors[:, None], norms, clipped


def private_train(
    data: Dataset,
    cfg: TrainConfig,
    C: MixingMatrix,  # noqa: N803
    *,
    init: ModelParams | None = None,
) -> tuple[ModelParams, pd.DataFrame]:
    """Train a linear or logistic model with banded correlated noise.

    At step ``t`` the clipped per-example gradients of batch ``t`` are summed, the
    correlated noise ``clip * sigma * z~_t`` is added, and the result is divided by the
    batch size before a plain SGD step.

    Args:
        data: Training records.
        cfg: Hyperparameters.
        C: Mixing matrix with ``cfg.T`` rows and band ``cfg.b``.
        init: Starting weights, zeros by default.

    Returns:
        Final parameters and the per-step log (``step, batch_loss, grad_norm_mean,
        clipped_fraction``).

    Raises:
        TrainingDivergedError: When a batch loss is not finite.
    """
    if C.T != cfg.T or C.band != cfg.b:
        message = (
            f"mixing matrix (T={C.T}, band={C.band}) does not match "
            f"config (T={cfg.T}, b={cfg.b})"
        )
        raise ArgumentError(message)
    schedule = partition_schedule(data.n, cfg.b, cfg.batch, cfg.T, cfg.seed)
    if cfg.batch == data.n // cfg.b:
        logger.warning("dataset-thin", n=data.n, b=cfg.b, batch=cfg.batch, sampling_rate=1.0)

    weights = (init or ModelParams.zeros(data.f)).weights.copy()
    if weights.size != data.f + 1:
        message = f"initial model has {weights.size} weights, expected {data.f + 1}"
        raise ArgumentError(message)

    stream = None
    if cfg.sigma > 0:
        noise_seed = int(derive_generator(cfg.seed, "train-noise").integers(2**63))
        stream = NoiseStream(C, weights.size, seed=noise_seed, scale=cfg.clip * cfg.sigma)

    records: list[dict[str, Any]] = []
    for t, rows in enumerate(schedule):
        design = data.design(rows)
        labels = data.labels[rows]
        loss = float(np.mean(per_example_losses(cfg.model_kind, design, labels, weights)))
        if not np.isfinite(loss):
            message = f"batch loss became non-finite at step {t}"
            raise TrainingDivergedError(message)
        grads = per_example_gradients(cfg.model_kind, design, labels, weights)
        clipped, norms, was_clipped = _clip_rows(grads, cfg.clip)
        total = clipped.sum(axis=0)
        if stream is not None:
            total = total + stream.next()
        weights = weights - cfg.eta * (total / cfg.batch)
        records.append(
            {
                "step": t,
                "batch_loss": loss,
                "grad_norm_mean": float(norms.mean()),
                "clipped_fraction": float(was_clipped.mean()),
            }
        )

    if not np.all(np.isfinite(weights)):
        message = "model weights became non-finite"
        raise TrainingDivergedError(message)
    log = pd.DataFrame(records, columns=LOG_COLUMNS)
    logger.info(
        "training-finished",
        steps=cfg.T,
        band=cfg.b,
        sigma=cfg.sigma,
        final_batch_loss=records[-1]["batch_loss"] if records else None,
    )
    return ModelParams(weights=weights), log


def training_loss(data: Dataset, params: ModelParams, kind: ModelKind) -> float:
    """Mean loss of ``params`` over the whole dataset."""
    return float(np.mean(per_example_losses(kind, data.design(), data.labels, params.weights)))
