"""Shared helpers: logging, seeded generators, file formats, and caching."""

from . import seeds

__all__ = ["seeds"]
