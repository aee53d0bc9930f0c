"""Workload matrices: the curvature workload and data-independent baselines."""

from __future__ import annotations

from .builders import (
    BUCKET_COUNT,
    BUCKET_THRESHOLD,
    WorkloadKind,
    WorkloadMatrix,
    curvature_workload,
    identity_workload,
    power_sums,
    prefix_workload,
)

__all__ = [
    "BUCKET_COUNT",
    "BUCKET_THRESHOLD",
    "WorkloadKind",
    "WorkloadMatrix",
    "curvature_workload",
    "identity_workload",
    "power_sums",
    "prefix_workload",
]
