"""Tabular datasets for private training."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np
import pandas as pd
from scipy.special import expit

from curvmix.errors import ArgumentError, ArtifactIOError
from curvmix.utils.seeds import derive_generator

if TYPE_CHECKING:
    from numpy.typing import NDArray

ModelKind = Literal["linear", "logistic"]

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class Dataset:
    """Feature matrix and labels.

    Attributes:
        features: ``n x f`` real matrix.
        labels: Length-``n`` targets, real for regression and 0/1 for classification.
    """

    features: NDArray[np.float64]
    labels: NDArray[np.float64]

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64).ravel()
        if features.ndim != 2:
            message = f"features must be a matrix, got shape {features.shape}"
            raise ArgumentError(message)
        if labels.size != features.shape[0]:
            message = f"{labels.size} labels for {features.shape[0]} rows"
            raise ArgumentError(message)
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(labels))):
            message = "dataset contains missing or non-finite values"
            raise ArgumentError(message)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        """Number of records."""
        return int(self.features.shape[0])

    @property
    def f(self) -> int:
        """Number of features."""
        return int(self.features.shape[1])

    def design(self, rows: NDArray[np.intp] | None = None) -> NDArray[np.float64]:
        """Features of ``rows`` (all rows by default) with a trailing bias column."""
        block = self.features if rows is None else self.features[rows]
        return np.hstack([block, np.ones((block.shape[0], 1))])

    def to_frame(self) -> pd.DataFrame:
        """Tabular form with one column per feature and the label column last."""
        frame = pd.DataFrame(self.features, columns=[f"x{i}" for i in range(self.f)])
        frame[LABEL_COLUMN] = self.labels
        return frame


def load_dataset(file_path: str | Path) -> Dataset:
    """Load a CSV dataset with a header row and a ``label`` column.

    Args:
        file_path: Location of the CSV file.

    Returns:
        Parsed dataset; every other column is a feature.
    """
    path = Path(file_path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        message = f"cannot read dataset {path}: {exc}"
        raise ArtifactIOError(message) from exc
    if LABEL_COLUMN not in frame.columns:
        message = f"dataset {path} has no '{LABEL_COLUMN}' column"
        raise ArtifactIOError(message)
    if frame.isna().any().any():
        message = f"dataset {path} has missing values"
        raise ArtifactIOError(message)
    try:
        features = frame.drop(columns=[LABEL_COLUMN]).to_numpy(dtype=np.float64)
        labels = frame[LABEL_COLUMN].to_numpy(dtype=np.float64)
    except ValueError as exc:
        message = f"dataset {path} has non-numeric values: {exc}"
        raise ArtifactIOError(message) from exc
    return Dataset(features=features, labels=labels)


def make_synthetic_task(
    n: int,
    f: int,
    kind: ModelKind,
    seed: int,
    *,
    split: str = "train",
) -> Dataset:
    """Draw a synthetic regression or classification task with a planted linear model.

    Splits of one seed share the planted model and draw their records independently,
    so a ``"public"`` split can stand in for public data from the same population.

    Args:
        n: Number of records.
        f: Number of features.
        kind: ``"linear"`` for noisy real targets, ``"logistic"`` for 0/1 labels.
        seed: Seed of the draw.
        split: Name of the record stream.

    Returns:
        Dataset with standard normal features.
    """
    if n < 1 or f < 1:
        message = f"synthetic task needs n >= 1 and f >= 1, got n={n}, f={f}"
        raise ArgumentError(message)
    planted = derive_generator(seed, "synthetic", kind, "planted").standard_normal(f) / np.sqrt(f)
    rng = derive_generator(seed, "synthetic", kind, split)
    features = rng.standard_normal((n, f))
    logits = 2.0 * (features @ planted)
    if kind == "linear":
        labels = logits + 0.1 * rng.standard_normal(n)
    else:
        labels = (rng.random(n) < expit(logits)).astype(np.float64)
    return Dataset(features=features, labels=labels)
