"""LangGraph orchestration of the end-to-end curvmix pipeline."""

from __future__ import annotations

from .pipeline_flow import PipelineState, build_graph, random_hessian, run_pipeline

__all__ = ["PipelineState", "build_graph", "random_hessian", "run_pipeline"]
