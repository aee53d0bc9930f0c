"""Helpers for deriving reproducible random generators from integer seeds."""

from __future__ import annotations

import zlib

import numpy as np


def _label_key(label: int | str) -> int:
    """Map a stream label to a non-negative integer spawn key."""
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    if label < 0:
        message = f"stream labels must be non-negative, got {label}"
        raise ValueError(message)
    return label


def derive_generator(seed: int, *labels: int | str) -> np.random.Generator:
    """Return a counter-based generator for the stream ``(seed, *labels)``.

    The same ``seed`` and ``labels`` always give the same stream, and distinct label
    tuples give statistically independent streams, whatever order they are created in.

    Args:
        seed: Non-negative base seed.
        labels: Stream coordinates, e.g. ``("noise", step, block)``.

    Returns:
        NumPy generator backed by a ``Philox`` bit generator.
    """
    sequence = np.random.SeedSequence(
        entropy=seed,
        spawn_key=tuple(_label_key(label) for label in labels),
    )
    return np.random.Generator(np.random.Philox(sequence))

