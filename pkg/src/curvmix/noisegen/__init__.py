"""Streaming correlated Gaussian noise from a banded mixing matrix."""

from __future__ import annotations

from .stream import BLOCK_SIZE, NoiseStream, empirical_cross_covariance, raw_draw

__all__ = ["BLOCK_SIZE", "NoiseStream", "empirical_cross_covariance", "raw_draw"]
