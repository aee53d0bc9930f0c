"""File-based cache of solved mixing problems."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from curvmix.errors import ArtifactIOError
from curvmix.mixopt import BandedGram, SolveReport, SolverOptions, solve_mixing
from curvmix.utils.logging import get_logger

if TYPE_CHECKING:
    from curvmix.workload import WorkloadMatrix

logger = get_logger(__name__)


class FileCache:
    """Persist solved gram matrices keyed by workload, band, and solver options."""

    def __init__(self, root: Path | str) -> None:
        """Initialize the cache at the provided root directory.

        Args:
            root: Filesystem location backing the cache entries.
        """
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _key(self, g: WorkloadMatrix, band: int, opts: SolverOptions) -> str:
        """Create a stable hash key for the cache entry.

        Args:
            g: Workload being solved.
            band: Band size.
            opts: Solver tolerances.

        Returns:
            Hex-encoded SHA256 digest.
        """
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(g.entries, dtype="<f8").tobytes())
        h.update(b"::")
        h.update(f"{g.T}:{band}".encode())
        h.update(b"::")
        h.update(json.dumps(asdict(opts), sort_keys=True).encode())
        return h.hexdigest()

    def get(
        self,
        g: WorkloadMatrix,
        band: int,
        opts: SolverOptions,
    ) -> tuple[BandedGram, SolveReport] | None:
        """Retrieve a cached solve if present.

        Returns:
            Cached gram matrix and report, or ``None`` when no entry exists.

        Raises:
            ArtifactIOError: When the entry exists but cannot be read back.
        """
        p = self.root / f"{self._key(g, band, opts)}.json"
        if not p.exists():
            return None
        try:
            cached = json.loads(p.read_text(encoding="utf-8"))
            gram = BandedGram.from_free(cached["free"], g.T, band)
            report = SolveReport(**cached["report"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            message = f"corrupt cache entry {p}: {exc}"
            raise ArtifactIOError(message) from exc
        return gram, report

    def set(
        self,
        g: WorkloadMatrix,
        band: int,
        opts: SolverOptions,
        value: tuple[BandedGram, SolveReport],
    ) -> None:
        """Store a solve in the cache."""
        gram, report = value
        p = self.root / f"{self._key(g, band, opts)}.json"
        payload = {"free": gram.free_values().tolist(), "report": report.to_dict()}
        p.write_text(json.dumps(payload), encoding="utf-8")


def cached_solve(
    cache: FileCache | None,
    g: WorkloadMatrix,
    band: int,
    opts: SolverOptions | None = None,
) -> tuple[BandedGram, SolveReport]:
    """Solve the mixing problem, reusing a cached result when ``cache`` has one."""
    opts = opts or SolverOptions()
    if cache is None:
        return solve_mixing(g, band, opts)
    hit = cache.get(g, band, opts)
    if hit is not None:
        logger.info("solve-cache-hit", T=g.T, band=band)
        return hit
    result = solve_mixing(g, band, opts)
    cache.set(g, band, opts, result)
    return result
