"""Benchmark tests for curvmix."""
