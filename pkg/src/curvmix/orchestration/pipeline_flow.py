"""LangGraph workflow chaining spectrum, workload, solve, factor and simulation."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, TypedDict

try:  # Preferred on py3.11+, fallback to typing_extensions for older Pythons
    from typing import NotRequired  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - environment dependent
    from typing_extensions import NotRequired  # noqa: TC002

import numpy as np
from langgraph.graph import END, StateGraph

# state annotations are resolved at runtime when the graph reads its channels
from numpy.typing import NDArray  # noqa: TC002

from curvmix.config import PipelineConfig  # noqa: TC001
from curvmix.errors import CurvmixError
from curvmix.mixopt import BandedGram, MixingMatrix, SolveReport, factor
from curvmix.quadsim import QuadProblem, closed_form_excess, simulate_excess
from curvmix.spectrum import (
    DENSE_CAP,
    EigenSpectrum,
    SymmetricOperator,
    TailFit,
    dense_eigs,
    extrapolate,
    fit_tail,
    lanczos_topk,
    truncate_negative,
)
from curvmix.utils.artifacts import read_matrix, read_spectrum
from curvmix.utils.cache import FileCache, cached_solve
from curvmix.utils.logging import get_logger
from curvmix.utils.seeds import derive_generator
from curvmix.workload import (
    WorkloadMatrix,
    curvature_workload,
    identity_workload,
    prefix_workload,
)

if TYPE_CHECKING:
    from collections.abc import Callable

    from langgraph.pregel import Pregel


logger = get_logger(__name__)


class PipelineState(TypedDict):
    """State passed between pipeline nodes."""

    config: PipelineConfig
    spectrum: NotRequired[EigenSpectrum]
    hessian: NotRequired[NDArray[np.float64] | None]
    tail_fit: NotRequired[TailFit | None]
    workload: NotRequired[WorkloadMatrix]
    solves: NotRequired[dict[int, tuple[BandedGram, SolveReport]]]
    mixings: NotRequired[dict[int, MixingMatrix]]
    simulations: NotRequired[list[dict[str, Any]]]
    error: NotRequired[str | None]
    exit_code: NotRequired[int]


def _failed(state: PipelineState, stage: str, exc: CurvmixError) -> PipelineState:
    logger.error("pipeline-stage-failed", stage=stage, error=str(exc))
    return {**state, "error": f"{stage}: {exc}", "exit_code": exc.exit_code}


def random_hessian(dim: int, seed: int) -> NDArray[np.float64]:
    """Random PSD matrix ``A A^T / dim`` with standard normal ``A``."""
    a = derive_generator(seed, "hessian").standard_normal((dim, dim))
    return a @ a.T / dim


def create_spectrum_node() -> Callable[[PipelineState], PipelineState]:
    """Construct the node that produces the non-negative Hessian spectrum.

    Returns:
        Callable that stores ``spectrum``, ``hessian`` and ``tail_fit`` in the state.
    """

    def spectrum_node(state: PipelineState) -> PipelineState:
        """Load or estimate the spectrum, then truncate and optionally extend it."""
        cfg = state["config"]
        source = cfg.spectrum
        hessian = None
        try:
            if source.kind == "spectrum":
                spectrum = read_spectrum(source.path or "")
            else:
                if source.kind == "random":
                    hessian = random_hessian(source.dim, cfg.seed)
                else:
                    hessian, _ = read_matrix(source.path or "")
                if source.k is None:
                    spectrum = dense_eigs(hessian)
                else:
                    op = SymmetricOperator.from_matrix(hessian)
                    spectrum = lanczos_topk(op, source.k, seed=cfg.seed)
            spectrum = truncate_negative(spectrum)
            fit = None
            if source.p_plus is not None and source.mu_pplus is not None:
                fit = fit_tail(spectrum, source.p_plus, source.mu_pplus)
                spectrum = extrapolate(fit, spectrum, max(spectrum.total_dim, source.p_plus))
        except CurvmixError as exc:
            return _failed(state, "spectrum", exc)

        logger.info(
            "pipeline-spectrum-ready",
            source=source.kind,
            total_dim=spectrum.total_dim,
            k_measured=spectrum.k_measured,
        )
        return {
            **state,
            "spectrum": spectrum,
            "hessian": hessian,
            "tail_fit": fit,
            "error": None,
        }

    return spectrum_node


def create_workload_node() -> Callable[[PipelineState], PipelineState]:
    """Construct the node that builds the design workload."""

    def workload_node(state: PipelineState) -> PipelineState:
        cfg = state["config"]
        try:
            if cfg.workload == "curvature":
                workload = curvature_workload(state["spectrum"], cfg.eta, cfg.T)
            elif cfg.workload == "identity":
                workload = identity_workload(cfg.T)
            else:
                workload = prefix_workload(cfg.T)
        except CurvmixError as exc:
            return _failed(state, "workload", exc)
        logger.info("pipeline-workload-ready", kind=cfg.workload, T=cfg.T)
        return {**state, "workload": workload}

    return workload_node


def create_optimize_node(
    cache: FileCache | None = None,
) -> Callable[[PipelineState], PipelineState]:
    """Construct the node that solves the mixing problem for every configured band.

    Args:
        cache: Optional store of earlier solves.

    Returns:
        Callable that stores ``solves`` keyed by band.
    """

    def optimize_node(state: PipelineState) -> PipelineState:
        cfg = state["config"]
        solves: dict[int, tuple[BandedGram, SolveReport]] = {}
        try:
            for band in cfg.bands:
                solves[band] = cached_solve(cache, state["workload"], band, cfg.solver)
        except CurvmixError as exc:
            return _failed(state, "optimize", exc)
        logger.info("pipeline-solves-ready", bands=list(cfg.bands))
        return {**state, "solves": solves}

    return optimize_node


def create_factor_node() -> Callable[[PipelineState], PipelineState]:
    """Construct the node that factors every solved gram matrix."""

    def factor_node(state: PipelineState) -> PipelineState:
        try:
            mixings = {band: factor(gram) for band, (gram, _) in state["solves"].items()}
        except CurvmixError as exc:
            return _failed(state, "factor", exc)
        return {**state, "mixings": mixings}

    return factor_node


def _quad_problem(state: PipelineState) -> QuadProblem | None:
    cfg = state["config"]
    hessian = state.get("hessian")
    hess: NDArray[np.float64] | EigenSpectrum
    if hessian is not None:
        hess, p = hessian, hessian.shape[0]
    else:
        hess, p = state["spectrum"], state["spectrum"].total_dim
    if p > DENSE_CAP:
        return None
    return QuadProblem(hess=hess, d=np.zeros(p), w0=np.ones(p), eta=cfg.eta, T=cfg.T)


def create_simulate_node() -> Callable[[PipelineState], PipelineState]:
    """Construct the node that scores every band in closed form and by simulation.

    Without ``trials`` only the closed form is computed. Spectra too large to
    materialize skip the Monte-Carlo part.
    """

    def simulate_node(state: PipelineState) -> PipelineState:
        cfg = state["config"]
        rows: list[dict[str, Any]] = []
        try:
            problem = _quad_problem(state) if cfg.trials else None
            if cfg.trials and problem is None:
                logger.warning(
                    "pipeline-simulation-skipped",
                    total_dim=state["spectrum"].total_dim,
                    cap=DENSE_CAP,
                )
            # score against the exact spectrum whenever the dense Hessian is known
            hessian = state.get("hessian")
            truth = state["spectrum"]
            if hessian is not None and hessian.shape[0] <= DENSE_CAP:
                truth = truncate_negative(dense_eigs(hessian))
            for band, (gram, report) in state["solves"].items():
                closed = closed_form_excess(truth, cfg.eta, cfg.T, gram, cfg.noise_scale)
                row: dict[str, Any] = {
                    "band": band,
                    "objective": report.objective_value,
                    "converged": report.converged,
                    "closed_form": closed,
                }
                if problem is not None:
                    result = simulate_excess(
                        problem,
                        state["mixings"][band],
                        cfg.noise_scale,
                        cfg.trials,
                        cfg.seed,
                        cfg.threads,
                    )
                    row.update(mc_mean=result.mean, mc_std_error=result.std_error)
                rows.append(row)
        except CurvmixError as exc:
            return _failed(state, "simulate", exc)
        return {**state, "simulations": rows}

    return simulate_node


def build_graph(cache: FileCache | None = None) -> Pregel:
    """Build the LangGraph flow from spectrum to simulation.

    A failing node records ``error`` and ``exit_code`` and the conditional edges end
    the run there.

    Args:
        cache: Optional solve cache shared by the optimize node.

    Returns:
        Compiled LangGraph ``Pregel`` workflow ready for execution.
    """
    workflow = StateGraph(PipelineState)

    stages: list[tuple[str, Callable[[PipelineState], PipelineState]]] = [
        ("spectrum", create_spectrum_node()),
        ("workload", create_workload_node()),
        ("optimize", create_optimize_node(cache)),
        ("factor", create_factor_node()),
        ("simulate", create_simulate_node()),
    ]
    for name, node in stages:
        workflow.add_node(name, node)

    def route_to(target: str) -> Callable[[PipelineState], object]:
        def should_continue(state: PipelineState) -> object:
            """Stop as soon as a node reports an error."""
            if state.get("error"):
                return END
            return target

        return should_continue

    for (name, _), (next_name, _) in zip(stages, stages[1:]):
        workflow.add_conditional_edges(name, route_to(next_name))
    workflow.add_edge(stages[-1][0], END)

    workflow.set_entry_point(stages[0][0])

    return workflow.compile()


def run_pipeline(config: PipelineConfig) -> PipelineState:
    """Run the compiled graph on ``config`` and return the final state."""
    cache = FileCache(config.cache_dir) if config.cache_dir else None
    graph = build_graph(cache)
    final: PipelineState = graph.invoke({"config": config})
    return final
