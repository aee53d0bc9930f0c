"""Reading and writing the CSV and JSON files exchanged between commands.

Matrices are plain CSV written with ``%.17g`` so every float survives a round trip,
next to a JSON sidecar ``<file>.json`` holding their metadata.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from curvmix.errors import ArtifactIOError, CurvmixError
from curvmix.mixopt import BandedGram, MixingMatrix
from curvmix.spectrum import EigenSpectrum, TailFit
from curvmix.workload import WorkloadMatrix

if TYPE_CHECKING:
    import pandas as pd
    from numpy.typing import NDArray


def sidecar_path(file_path: str | Path) -> Path:
    """Location of the metadata sidecar of a matrix file."""
    path = Path(file_path)
    return path.with_name(path.name + ".json")


def write_json(file_path: str | Path, data: Any) -> Path:
    """Write ``data`` as indented JSON, creating parent directories."""
    path = Path(file_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        message = f"cannot write {path}: {exc}"
        raise ArtifactIOError(message) from exc
    return path


def read_json(file_path: str | Path) -> Any:
    """Parse a JSON file."""
    path = Path(file_path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        message = f"cannot read JSON from {path}: {exc}"
        raise ArtifactIOError(message) from exc


def write_matrix(
    file_path: str | Path,
    entries: NDArray[np.float64],
    meta: dict[str, Any] | None = None,
) -> Path:
    """Write a matrix as CSV plus its JSON sidecar.

    Args:
        file_path: CSV destination.
        entries: Two-dimensional array.
        meta: Extra sidecar fields; ``rows`` and ``cols`` are always recorded.

    Returns:
        The CSV path.
    """
    path = Path(file_path)
    matrix = np.atleast_2d(np.asarray(entries, dtype=np.float64))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, matrix, fmt="%.17g", delimiter=",")
    except OSError as exc:
        message = f"cannot write {path}: {exc}"
        raise ArtifactIOError(message) from exc
    shape = {"rows": matrix.shape[0], "cols": matrix.shape[1]}
    write_json(sidecar_path(path), {**shape, **(meta or {})})
    return path


def read_matrix(file_path: str | Path) -> tuple[NDArray[np.float64], dict[str, Any]]:
    """Read a CSV matrix and its sidecar, if present.

    Returns:
        ``(entries, meta)``; ``meta`` is empty without a sidecar.
    """
    path = Path(file_path)
    try:
        entries = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as exc:
        message = f"cannot read matrix from {path}: {exc}"
        raise ArtifactIOError(message) from exc
    side = sidecar_path(path)
    meta: dict[str, Any] = read_json(side) if side.exists() else {}
    if not isinstance(meta, dict):
        message = f"sidecar {side} is not a JSON object"
        raise ArtifactIOError(message)
    expected = (meta.get("rows", entries.shape[0]), meta.get("cols", entries.shape[1]))
    if entries.shape != tuple(expected):
        message = f"{path} has shape {entries.shape} but its sidecar says {expected}"
        raise ArtifactIOError(message)
    return entries, meta


def _infer_band(entries: NDArray[np.float64]) -> int:
    rows, cols = np.nonzero(entries)
    return int(np.max(np.abs(rows - cols))) + 1 if rows.size else 1


def write_workload(file_path: str | Path, g: WorkloadMatrix) -> Path:
    """Write a workload matrix."""
    meta = {"T": g.T, "kind": g.kind, "eta": g.eta, "diverging": g.diverging}
    return write_matrix(file_path, g.entries, meta)


def read_workload(file_path: str | Path) -> WorkloadMatrix:
    """Read a workload matrix written by :func:`write_workload` or any square CSV."""
    entries, meta = read_matrix(file_path)
    try:
        return WorkloadMatrix(
            entries=entries,
            T=int(meta.get("T", entries.shape[0])),
            eta=meta.get("eta"),
            kind=meta.get("kind", "curvature"),
            diverging=bool(meta.get("diverging", False)),
        )
    except CurvmixError as exc:
        message = f"invalid workload in {file_path}: {exc}"
        raise ArtifactIOError(message) from exc


def write_gram(file_path: str | Path, x: BandedGram) -> Path:
    """Write a banded gram matrix."""
    return write_matrix(file_path, x.entries, {"T": x.T, "band": x.band})


def read_gram(file_path: str | Path) -> BandedGram:
    """Read a banded gram matrix; the band is inferred when there is no sidecar."""
    entries, meta = read_matrix(file_path)
    try:
        return BandedGram(entries=entries, band=int(meta.get("band", _infer_band(entries))))
    except CurvmixError as exc:
        message = f"invalid gram matrix in {file_path}: {exc}"
        raise ArtifactIOError(message) from exc


def write_mixing(file_path: str | Path, c: MixingMatrix) -> Path:
    """Write a mixing matrix."""
    return write_matrix(file_path, c.entries, {"T": c.T, "band": c.band})


def read_mixing(file_path: str | Path) -> MixingMatrix:
    """Read a mixing matrix; the band is inferred when there is no sidecar."""
    entries, meta = read_matrix(file_path)
    try:
        return MixingMatrix(entries=entries, band=int(meta.get("band", _infer_band(entries))))
    except CurvmixError as exc:
        message = f"invalid mixing matrix in {file_path}: {exc}"
        raise ArtifactIOError(message) from exc


def read_spectrum(file_path: str | Path) -> EigenSpectrum:
    """Read an eigenspectrum JSON document."""
    data = read_json(file_path)
    try:
        return EigenSpectrum.from_dict(data)
    except (CurvmixError, KeyError, TypeError, ValueError) as exc:
        message = f"invalid spectrum in {file_path}: {exc}"
        raise ArtifactIOError(message) from exc


def read_tail_fit(file_path: str | Path) -> TailFit:
    """Read a tail-fit JSON document."""
    data = read_json(file_path)
    try:
        return TailFit.from_dict(data)
    except (CurvmixError, KeyError, TypeError, ValueError) as exc:
        message = f"invalid tail fit in {file_path}: {exc}"
        raise ArtifactIOError(message) from exc


def write_table(file_path: str | Path, frame: pd.DataFrame) -> Path:
    """Write a data frame as CSV with a header row and no index."""
    path = Path(file_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.17g")
    except OSError as exc:
        message = f"cannot write {path}: {exc}"
        raise ArtifactIOError(message) from exc
    return path
