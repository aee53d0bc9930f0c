"""Online generation of cross-iteration correlated Gaussian noise."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING

import numpy as np

from curvmix.errors import ArgumentError, InvalidFactorError, StreamExhaustedError
from curvmix.utils.logging import get_logger
from curvmix.utils.seeds import derive_generator

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from curvmix.mixopt import MixingMatrix

logger = get_logger(__name__)

BLOCK_SIZE = 1 << 16


def _draw_block(seed: int, step: int, block: int, size: int) -> NDArray[np.float64]:
    return derive_generator(seed, "noise", step, block).standard_normal(size)


def raw_draw(seed: int, step: int, p: int, threads: int = 1) -> NDArray[np.float64]:
    """The i.i.d. ``N(0, I_p)`` input of ``step``, split into fixed coordinate blocks.

    Every block has its own counter-based stream keyed by ``(seed, step, block)``, so
    the result does not depend on ``threads``.
    """
    sizes = [min(BLOCK_SIZE, p - start) for start in range(0, p, BLOCK_SIZE)]
    if threads <= 1 or len(sizes) == 1:
        blocks = [_draw_block(seed, step, i, n) for i, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(
                pool.map(lambda item: _draw_block(seed, step, *item), enumerate(sizes))
            )
    return np.concatenate(blocks) if blocks else np.zeros(0)


class NoiseStream:
    """Stream ``z~_0, z~_1, ...`` solving ``sum_j C[t, j] z~_j = z_t`` one step at a time.

    Only the last ``band - 1`` unscaled outputs are retained. ``scale`` multiplies each
    emitted vector; the recurrence itself runs on unit-variance noise.
    """

    def __init__(
        self,
        mixing: MixingMatrix,
        p: int,
        *,
        seed: int,
        scale: float = 1.0,
        threads: int = 1,
    ) -> None:
        """Start a stream at step 0.

        Args:
            mixing: Lower-triangular banded mixing matrix ``C``.
            p: Length of every noise vector.
            seed: Seed of the underlying Gaussian draws.
            scale: Multiplier applied at emission.
            threads: Worker threads for drawing coordinate blocks.
        """
        if p < 1:
            message = f"noise dimension must be positive, got {p}"
            raise ArgumentError(message)
        self.mixing = mixing
        self.p = p
        self.seed = seed
        self.scale = scale
        self.threads = threads
        self.step = 0
        self.history: deque[NDArray[np.float64]] = deque(maxlen=mixing.band - 1)

    @property
    def T(self) -> int:  # noqa: N802
        """Total number of steps the stream can emit."""
        return self.mixing.T

    def next(self) -> NDArray[np.float64]:
        """Emit the next correlated noise vector.

        Returns:
            ``scale * z~_t`` of length ``p``.

        Raises:
            StreamExhaustedError: After ``T`` emissions.
            InvalidFactorError: When ``C[t, t] <= 0``.
        """
        t = self.step
        if t >= self.T:
            message = f"noise stream exhausted after {self.T} steps"
            raise StreamExhaustedError(message)
        row = self.mixing.entries[t]
        if not row[t] > 0:
            message = f"mixing matrix diagonal C[{t},{t}]={row[t]} is not positive"
            raise InvalidFactorError(message)

        acc = raw_draw(self.seed, t, self.p, self.threads)
        # history holds z~_{t-len} .. z~_{t-1}
        for offset, past in enumerate(self.history, start=t - len(self.history)):
            coeff = row[offset]
            if coeff != 0.0:
                acc -= coeff * past
        acc /= row[t]

        self.history.append(acc)
        self.step += 1
        return self.scale * acc

    def dump(self, n: int) -> NDArray[np.float64]:
        """Emit the next ``n`` steps as rows of an ``n x p`` array."""
        if n > self.T - self.step:
            message = f"cannot dump {n} steps, only {self.T - self.step} remain"
            raise ArgumentError(message)
        return np.vstack([self.next() for _ in range(n)]) if n else np.zeros((0, self.p))


def empirical_cross_covariance(
    mixing: MixingMatrix,
    p: int,
    trials: int,
    seed: int,
) -> NDArray[np.float64]:
    """Monte-Carlo estimate of ``E[z~_s . z~_t] / p``, which converges to ``(C^T C)^-1``.

    Args:
        mixing: Mixing matrix ``C``.
        p: Coordinates per stream; every coordinate is an independent scalar stream.
        trials: Independent streams of dimension ``p``.
        seed: Base seed; trial ``r`` uses a stream derived from ``(seed, r)``.

    Returns:
        ``T x T`` estimate.
    """
    if trials < 1:
        message = f"trials must be at least 1, got {trials}"
        raise ArgumentError(message)
    T = mixing.T  # noqa: N806
    total = np.zeros((T, T))
    for trial in range(trials):
        trial_seed = int(derive_generator(seed, "covariance", trial).integers(2**63))
        stream = NoiseStream(mixing, p, seed=trial_seed)
        noise = stream.dump(T)
        total += noise @ noise.T
    logger.debug("cross-covariance-estimated", T=T, p=p, trials=trials)
    return total / (p * trials)
