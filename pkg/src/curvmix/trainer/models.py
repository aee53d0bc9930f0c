"""Linear and logistic regression with closed-form per-example gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.special import expit

from curvmix.errors import ArgumentError, ArtifactIOError
from curvmix.spectrum import SymmetricOperator

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from .data import Dataset, ModelKind


@dataclass(frozen=True)
class ModelParams:
    """Weights of a linear model; the last entry is the bias."""

    weights: NDArray[np.float64]

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if not np.all(np.isfinite(weights)):
            message = "model weights must be finite"
            raise ArgumentError(message)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def zeros(cls, f: int) -> ModelParams:
        """All-zero weights for ``f`` features plus bias."""
        return cls(weights=np.zeros(f + 1))

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON document form."""
        return {"weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelParams:
        """Parse the JSON document form."""
        try:
            return cls(weights=np.asarray(data["weights"], dtype=np.float64))
        except (KeyError, TypeError, ValueError) as exc:
            message = f"malformed model document: {exc}"
            raise ArtifactIOError(message) from exc


def per_example_losses(
    kind: ModelKind,
    design: NDArray[np.float64],
    labels: NDArray[np.float64],
    weights: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Squared loss ``(a.w - y)^2 / 2`` or cross-entropy per row of ``design``."""
    z = design @ weights
    if kind == "linear":
        return 0.5 * (z - labels) ** 2
    return np.logaddexp(0.0, z) - labels * z


def per_example_gradients(
    kind: ModelKind,
    design: NDArray[np.float64],
    labels: NDArray[np.float64],
    weights: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Gradient of each example's loss, one row per example."""
    z = design @ weights
    residual = z - labels if kind == "linear" else expit(z) - labels
    return residual[:, None] * design


def hessian_operator(data: Dataset, params: ModelParams, kind: ModelKind) -> SymmetricOperator:
    """Matrix-free Hessian of the mean training loss at ``params``.

    Linear regression has ``A^T A / n``; logistic regression weights each row by
    ``s (1 - s)`` with ``s`` the predicted probability.

    Args:
        data: Dataset the loss averages over.
        params: Point of evaluation.
        kind: Model family.

    Returns:
        Operator of dimension ``f + 1``.
    """
    design = data.design()
    if params.weights.size != design.shape[1]:
        message = f"model has {params.weights.size} weights for {design.shape[1]} inputs"
        raise ArgumentError(message)
    if kind == "linear":
        curvature = np.ones(data.n)
    else:
        prob = expit(design @ params.weights)
        curvature = prob * (1.0 - prob)
    n = data.n

    def apply(v: NDArray[np.float64]) -> NDArray[np.float64]:
        return design.T @ (curvature * (design @ v)) / n

    return SymmetricOperator(dim=design.shape[1], apply=apply)
