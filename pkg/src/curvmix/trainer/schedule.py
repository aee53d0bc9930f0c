"""Banded batch schedule and the parameters an external accountant consumes."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from curvmix.errors import ArgumentError
from curvmix.utils.logging import get_logger
from curvmix.utils.seeds import derive_generator

if TYPE_CHECKING:
    import numpy as np
    from numpy.typing import NDArray

logger = get_logger(__name__)


def _partition_size(n: int, b: int, batch: int) -> int:
    if b < 1 or batch < 1:
        message = f"band and batch must be positive, got b={b}, batch={batch}"
        raise ArgumentError(message)
    size = n // b
    if size == 0:
        message = f"cannot split n={n} records into b={b} partitions"
        raise ArgumentError(message)
    if batch > size:
        message = f"batch={batch} exceeds the partition size floor(n/b)={size}"
        raise ArgumentError(message)
    return size


def partition_schedule(
    n: int,
    b: int,
    batch: int,
    T: int,  # noqa: N803
    seed: int,
) -> list[NDArray[np.intp]]:
    """Batches drawn from ``b`` fixed disjoint partitions in round-robin order.

    The records are permuted once and split into ``b`` parts of ``floor(n / b)``;
    remainder records are never used. Batch ``t`` is a uniform sample without
    replacement of size ``batch`` from part ``t mod b``.

    Args:
        n: Number of records.
        b: Band size, the number of partitions.
        batch: Records per batch.
        T: Number of batches.
        seed: Seed of the permutation and the per-step samples.

    Returns:
        ``T`` index arrays.
    """
    size = _partition_size(n, b, batch)
    dropped = n - size * b
    if dropped:
        logger.warning("schedule-remainder-dropped", n=n, b=b, dropped=dropped)
    order = derive_generator(seed, "partition").permutation(n)
    parts = order[: size * b].reshape(b, size)
    return [
        derive_generator(seed, "batch", t).choice(parts[t % b], size=batch, replace=False)
        for t in range(T)
    ]


def accountant_params(n: int, batch: int, b: int, T: int) -> tuple[float, int]:  # noqa: N803
    """Sampling rate and composition count of the banded schedule.

    ``q = batch / floor(n / b)`` and ``ceil(T batch^2 / (q n))``. The count is computed
    in exact integer arithmetic as ``ceil(T * batch * floor(n / b) / n)``.

    Returns:
        ``(q, compositions)``.
    """
    size = _partition_size(n, b, batch)
    q = batch / size
    compositions = -(-(T * batch * size) // n)
    return q, compositions


def accountant_handoff(n: int, batch: int, b: int, T: int, sigma: float) -> dict[str, Any]:  # noqa: N803
    """Document handed to an external subsampled-Gaussian accountant."""
    q, compositions = accountant_params(n, batch, b, T)
    return {"q": q, "compositions": compositions, "sigma": sigma}
