"""Pipeline configuration loaded from YAML and in-memory data."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import yaml

from curvmix.errors import ArgumentError, ArtifactIOError
from curvmix.mixopt import SolverOptions

THREADS_ENV = "CURVMIX_THREADS"

SpectrumSourceKind = Literal["random", "matrix", "spectrum"]


def resolve_threads(value: int | None = None) -> int:
    """Return ``value``, else ``$CURVMIX_THREADS``, else 1.

    Raises:
        ArgumentError: When the resolved count is not a positive integer.
    """
    if value is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            value = int(raw)
        except ValueError as exc:
            message = f"{THREADS_ENV}={raw!r} is not an integer"
            raise ArgumentError(message) from exc
    if value < 1:
        message = f"thread count must be at least 1, got {value}"
        raise ArgumentError(message)
    return value


@dataclass(frozen=True)
class SpectrumSource:
    """Where the pipeline gets its Hessian spectrum.

    Attributes:
        kind: ``random`` draws a PSD matrix of size ``dim``; ``matrix`` reads a dense
            CSV matrix from ``path``; ``spectrum`` reads a spectrum JSON from ``path``.
        path: Input file for ``matrix`` and ``spectrum``.
        dim: Dimension of the random matrix.
        k: Top eigenvalues estimated by Lanczos; ``None`` solves densely.
        p_plus: Tail anchor index; enables the tail fit when set with ``mu_pplus``.
        mu_pplus: Tail anchor value.
    """

    kind: SpectrumSourceKind = "random"
    path: str | None = None
    dim: int = 8
    k: int | None = None
    p_plus: int | None = None
    mu_pplus: float | None = None


@dataclass(frozen=True)
class PipelineConfig:
    """End-to-end run: spectrum, workload, per-band solves, factors and simulation."""

    name: str
    spectrum: SpectrumSource
    eta: float
    T: int  # noqa: N815
    bands: tuple[int, ...]
    workload: Literal["curvature", "identity", "prefix"] = "curvature"
    solver: SolverOptions = field(default_factory=SolverOptions)
    trials: int = 0
    noise_scale: float = 1.0
    seed: int = 0
    threads: int = 1
    cache_dir: str | None = None

    def __post_init__(self) -> None:
        if self.eta <= 0:
            message = f"eta must be positive, got {self.eta}"
            raise ArgumentError(message)
        if self.T < 1:
            message = f"T must be at least 1, got {self.T}"
            raise ArgumentError(message)
        if not self.bands or any(not 1 <= b <= self.T for b in self.bands):
            message = f"bands {list(self.bands)} must be non-empty and within [1, {self.T}]"
            raise ArgumentError(message)
        if self.workload not in ("curvature", "identity", "prefix"):
            message = f"unknown workload kind {self.workload!r}"
            raise ArgumentError(message)
        if self.trials != 0 and self.trials < 2:
            message = f"trials must be 0 (no simulation) or at least 2, got {self.trials}"
            raise ArgumentError(message)
        source = self.spectrum
        if source.kind not in ("random", "matrix", "spectrum"):
            message = f"unknown spectrum source {source.kind!r}"
            raise ArgumentError(message)
        if source.kind != "random" and source.path is None:
            message = f"spectrum source {source.kind!r} needs a path"
            raise ArgumentError(message)
        if source.kind == "random" and source.dim < 1:
            message = f"random spectrum dimension must be positive, got {source.dim}"
            raise ArgumentError(message)
        if (source.p_plus is None) != (source.mu_pplus is None):
            message = "p_plus and mu_pplus must be given together"
            raise ArgumentError(message)


def load_pipeline_from_dict(data: dict[str, Any], base_dir: Path | None = None) -> PipelineConfig:
    """Load a pipeline definition from an in-memory mapping.

    Args:
        data: Dictionary matching the pipeline schema.
        base_dir: Directory that relative input paths are resolved against.

    Returns:
        Validated `PipelineConfig` instance.
    """
    try:
        spectrum_data = dict(data.get("spectrum", {}))
        if base_dir is not None and spectrum_data.get("path"):
            spectrum_data["path"] = str(base_dir / spectrum_data["path"])
        workload = data["workload"]
        return PipelineConfig(
            name=str(data["name"]),
            spectrum=SpectrumSource(**spectrum_data),
            eta=float(workload["eta"]),
            T=int(workload["T"]),
            bands=tuple(int(b) for b in data["bands"]),
            workload=workload.get("kind", "curvature"),
            solver=SolverOptions(**data.get("solver", {})),
            trials=int(data.get("simulate", {}).get("trials", 0)),
            noise_scale=float(data.get("simulate", {}).get("noise_scale", 1.0)),
            seed=int(data.get("seed", 0)),
            threads=int(data.get("threads", 1)),
            cache_dir=data.get("cache_dir"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ArgumentError):
            raise
        message = f"malformed pipeline configuration: {exc!r}"
        raise ArgumentError(message) from exc


def load_pipeline_from_yaml(file_path: str | Path) -> PipelineConfig:
    """Load a pipeline definition from a YAML file.

    Relative input paths in the file are resolved against the file's directory.

    Args:
        file_path: Location of the YAML pipeline file.

    Returns:
        Parsed `PipelineConfig` instance.
    """
    path = Path(file_path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        message = f"cannot read pipeline configuration {path}: {exc}"
        raise ArtifactIOError(message) from exc
    if not isinstance(data, dict):
        message = f"pipeline configuration {path} is not a mapping"
        raise ArgumentError(message)
    return load_pipeline_from_dict(data, base_dir=path.parent)
