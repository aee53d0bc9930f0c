"""Workload matrices defining the mixing-matrix objective ``Tr(X^-1 G)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy.linalg import hankel

from curvmix.errors import ArgumentError
from curvmix.utils.logging import get_logger

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.spectrum import EigenSpectrum

logger = get_logger(__name__)

WorkloadKind = Literal["curvature", "identity", "prefix"]

BUCKET_THRESHOLD = 10_000
BUCKET_COUNT = 1024


@dataclass(frozen=True)
class WorkloadMatrix:
    """Symmetric PSD ``T x T`` workload.

    Attributes:
        entries: Matrix entries.
        T: Iteration count.
        eta: Learning rate used to build a curvature workload, ``None`` otherwise.
        kind: Which builder produced the matrix.
        diverging: Set when ``eta * max(mu) >= 2`` (noise-free descent diverges).
    """

    entries: NDArray[np.float64]
    T: int  # noqa: N815
    eta: float | None = None
    kind: WorkloadKind = "curvature"
    diverging: bool = False

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)
        if entries.shape != (self.T, self.T):
            message = f"workload shape {entries.shape} does not match T={self.T}"
            raise ArgumentError(message)


def _bucket(mu: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Compress positive eigenvalues into log-spaced buckets.

    Each bucket keeps its count and mean. A bucket holding more than one distinct
    value is represented by two nodes matching its count, mean, variance and third
    central moment, which keeps the power sums accurate to fourth order in the bucket
    width.

    Returns:
        ``(nodes, weights)`` with ``sum(weights) == mu.size``.
    """
    lo, hi = float(mu.min()), float(mu.max())
    if lo == hi:
        return np.array([lo]), np.array([float(mu.size)])
    edges = np.geomspace(lo, hi, BUCKET_COUNT + 1)
    label = np.clip(np.searchsorted(edges, mu, side="right") - 1, 0, BUCKET_COUNT - 1)
    count = np.bincount(label, minlength=BUCKET_COUNT).astype(np.float64)
    occupied = count > 0
    total = np.bincount(label, weights=mu, minlength=BUCKET_COUNT)
    mean = np.zeros(BUCKET_COUNT)
    mean[occupied] = total[occupied] / count[occupied]
    dev = mu - mean[label]
    var = np.bincount(label, weights=dev**2, minlength=BUCKET_COUNT)
    skew = np.bincount(label, weights=dev**3, minlength=BUCKET_COUNT)
    var[occupied] /= count[occupied]
    skew[occupied] /= count[occupied]

    nodes: list[NDArray[np.float64]] = []
    weights: list[NDArray[np.float64]] = []
    point = occupied & (var <= (1e-14 * mean) ** 2)
    nodes.append(mean[point])
    weights.append(count[point])

    split = occupied & ~point
    v, t, c, m = var[split], skew[split], count[split], mean[split]
    # offsets a < 0 < b are the roots of x^2 - (t/v) x - v = 0
    half = 0.5 * t / v
    root = np.sqrt(half**2 + v)
    a, b = half - root, half + root
    nodes.extend([m + a, m + b])
    weights.extend([c * b / (b - a), c * -a / (b - a)])
    return np.concatenate(nodes), np.concatenate(weights)


def power_sums(
    mu: NDArray[np.float64],
    weights: NDArray[np.float64],
    eta: float,
    count: int,
) -> NDArray[np.float64]:
    """Return ``s_k = sum_i w_i mu_i (1 - eta mu_i)^k`` for ``k = 0 .. count-1``."""
    ratio = 1.0 - eta * mu
    term = weights * mu
    sums = np.empty(count)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(count):
            sums[k] = term.sum()
            term = term * ratio
    return sums


def curvature_workload(
    s: EigenSpectrum,
    eta: float,
    T: int,  # noqa: N803
    *,
    bucket_threshold: int = BUCKET_THRESHOLD,
) -> WorkloadMatrix:
    """Build the curvature workload ``V^T M V`` from a Hessian spectrum.

    Entry ``[j, l]`` is ``sum_i mu_i (1 - eta mu_i)^(2T - j - l - 2)`` (0-based), so the
    matrix is the Hankel matrix of the power sums ``s_0 .. s_{2T-2}`` read backwards.

    Args:
        s: Non-negative spectrum (apply ``truncate_negative`` first).
        eta: Learning rate, positive.
        T: Iteration count, at least 1.
        bucket_threshold: Spectra with more positive entries than this are bucketed.

    Returns:
        Curvature workload; ``diverging`` is set when ``eta * max(mu) >= 2``.
    """
    if eta <= 0:
        message = f"eta must be positive, got {eta}"
        raise ArgumentError(message)
    if T < 1:
        message = f"T must be at least 1, got {T}"
        raise ArgumentError(message)
    mu = s.values
    if mu.size and mu.min() < 0:
        message = "curvature workload needs a non-negative spectrum; truncate it first"
        raise ArgumentError(message)

    top = float(mu.max()) if mu.size else 0.0
    diverging = eta * top >= 2.0
    if diverging:
        logger.warning("workload-divergent-regime", eta=eta, mu_max=top, eta_mu=eta * top)

    positive = mu[mu > 0]
    if positive.size > bucket_threshold:
        nodes, weights = _bucket(positive)
        logger.debug("workload-bucketed", eigenvalues=positive.size, nodes=nodes.size)
    else:
        nodes, weights = positive, np.ones_like(positive)

    sums = power_sums(nodes, weights, eta, 2 * T - 1)
    # G[j, l] = s[2T - 2 - j - l]: a Hankel matrix of the reversed sums
    reversed_sums = sums[::-1]
    entries = hankel(reversed_sums[:T], reversed_sums[T - 1 :])
    return WorkloadMatrix(entries=entries, T=T, eta=eta, kind="curvature", diverging=diverging)


def identity_workload(T: int) -> WorkloadMatrix:  # noqa: N803
    """Identity workload, the independent-noise squared-error objective."""
    if T < 1:
        message = f"T must be at least 1, got {T}"
        raise ArgumentError(message)
    return WorkloadMatrix(entries=np.eye(T), T=T, kind="identity")


def prefix_workload(T: int) -> WorkloadMatrix:  # noqa: N803
    """Prefix-sum workload ``A^T A`` with ``A`` the lower-triangular all-ones matrix."""
    if T < 1:
        message = f"T must be at least 1, got {T}"
        raise ArgumentError(message)
    index = np.arange(T)
    entries = (T - np.maximum.outer(index, index)).astype(np.float64)
    return WorkloadMatrix(entries=entries, T=T, kind="prefix")
