"""Structured logging for curvmix.

Every module logs through :func:`get_logger` with short kebab-case event names and
numeric context as key/value pairs. Records go to stderr so that artifacts written to
stdout stay parseable.
"""

from __future__ import annotations

import logging
import sys
from typing import TYPE_CHECKING, Any

import numpy as np
import structlog

if TYPE_CHECKING:
    from collections.abc import MutableMapping

    from structlog.stdlib import BoundLogger

# arrays longer than this are logged as a shape summary
MAX_LOGGED_ARRAY = 16


def _to_python(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        if value.size <= MAX_LOGGED_ARRAY:
            return value.tolist()
        return {"shape": list(value.shape), "min": float(value.min()), "max": float(value.max())}
    return value


def numpy_values(
    _logger: Any,
    _method: str,
    event_dict: MutableMapping[str, Any],
) -> MutableMapping[str, Any]:
    """Processor turning NumPy scalars and arrays into JSON-friendly values."""
    for key, value in event_dict.items():
        event_dict[key] = _to_python(value)
    return event_dict


def configure_logging(level: str = "INFO", *, json: bool = True) -> None:
    """Configure structlog and stdlib logging handlers.

    Args:
        level: Desired log level name (e.g. ``"INFO"``).
        json: If ``True`` emit JSON records, otherwise pretty console output.
    """
    logging_level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=logging_level, format="%(message)s", stream=sys.stderr)

    shared_processors: list[structlog.typing.Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        numpy_values,
    ]

    renderer: structlog.typing.Processor
    if json:
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer()

    structlog.configure(
        processors=[
            *shared_processors,
            structlog.processors.EventRenamer("message"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(logging_level),
        logger_factory=structlog.stdlib.LoggerFactory(),
        # module loggers are created at import time, before the CLI configures
        cache_logger_on_first_use=False,
    )


def bind_run_context(**values: Any) -> None:
    """Attach ``values`` (command, seed, ...) to every record of the current run."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(**values)


def get_logger(name: str = "curvmix") -> BoundLogger:
    """Return a structlog logger bound to ``name``.

    Args:
        name: Logical logger name used when emitting records.

    Returns:
        Configured structlog logger instance.
    """
    return structlog.get_logger(name)
