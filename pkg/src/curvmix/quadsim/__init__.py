"""Closed-form and simulated excess loss of correlated-noise descent on quadratics."""

from __future__ import annotations

from .problem import QuadProblem, closed_form_excess, noise_free_descent
from .simulate import IDENTITY_TOLERANCE, SimulationResult, band_sweep, simulate_excess

__all__ = [
    "IDENTITY_TOLERANCE",
    "QuadProblem",
    "SimulationResult",
    "band_sweep",
    "closed_form_excess",
    "noise_free_descent",
    "simulate_excess",
]
