"""Utilities for rendering curvmix JSON reports as simple HTML."""

from __future__ import annotations

import html
import json
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping
    from pathlib import Path


def _scalar_rows(record: Mapping[str, Any]) -> str:
    cells = []
    for key, value in record.items():
        if isinstance(value, (dict, list)):
            continue
        cells.append(
            f"<tr><th>{html.escape(str(key))}</th><td>{html.escape(str(value))}</td></tr>"
        )
    return "\n".join(cells)


def render_simple(records: Iterable[tuple[str, Mapping[str, Any]]]) -> str:
    """Render named report ``records`` into a minimal HTML page.

    Each record gets a card with a table of its scalar fields followed by the full
    JSON document.

    Args:
        records: ``(title, report)`` pairs, e.g. a file name and its parsed JSON.

    Returns:
        HTML document as a string.
    """
    data = list(records)
    cards = "\n".join(
        f"""  <div class="card">
    <h2>{html.escape(title)}</h2>
    <table>
{_scalar_rows(record)}
    </table>
    <pre>{html.escape(json.dumps(record, indent=2))}</pre>
  </div>"""
        for title, record in data
    )
    return f"""<!doctype html>
<html>
<head>
  <meta charset='utf-8'>
  <title>curvmix report</title>
  <style>
    body {{
      font-family: system-ui, -apple-system, Segoe UI, Roboto, sans-serif;
      margin: 2rem;
    }}
    .card {{
      border: 1px solid #ddd;
      border-radius: 8px;
      padding: 1rem;
      margin-bottom: 1rem;
    }}
    th {{
      text-align: left;
      padding-right: 1rem;
    }}
    pre {{
      white-space: pre-wrap;
    }}
  </style>
</head>
<body>
  <h1>curvmix report</h1>
  <div class="card">Reports: {len(data)}</div>
{cards}
</body>
</html>
"""


def write_html(records: Iterable[tuple[str, Mapping[str, Any]]], out_path: Path) -> None:
    """Render ``records`` and persist them to ``out_path`` as HTML.

    Args:
        records: ``(title, report)`` pairs.
        out_path: Destination path for the generated HTML.
    """
    page = render_simple(records)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(page, encoding="utf-8")
