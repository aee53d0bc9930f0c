"""Hessian eigenspectrum estimation and post-processing."""

from __future__ import annotations

from .lanczos import DENSE_CAP, dense_eigs, lanczos_topk
from .tail import extrapolate, fit_tail
from .types import (
    EigenSpectrum,
    SymmetricOperator,
    TailFit,
    check_symmetry,
    merge_spectra,
    top_k,
    truncate_negative,
)

__all__ = [
    "DENSE_CAP",
    "EigenSpectrum",
    "SymmetricOperator",
    "TailFit",
    "check_symmetry",
    "dense_eigs",
    "extrapolate",
    "fit_tail",
    "lanczos_topk",
    "merge_spectra",
    "top_k",
    "truncate_negative",
]
