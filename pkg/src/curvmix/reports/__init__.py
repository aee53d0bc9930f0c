"""HTML reporting utilities for curvmix."""

from __future__ import annotations

from .html import render_simple, write_html

__all__ = ["render_simple", "write_html"]
